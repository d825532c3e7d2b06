"""
Tests for the `.rvimg` image and `.mask` sidecar text formats.
"""

from pathlib import Path

import pytest

from keyflip.asm.image_file import load_image, read_program, save_image, write_image
from keyflip.benchmarks.corpus import BenchSpec
from keyflip.core.exceptions import FormatError, MaskError
from keyflip.isa.image import ProgramImage
from keyflip.obfuscate.mask import (
    MaskStream,
    load_mask,
    make_mask,
    read_mask,
    save_mask,
    write_mask,
)
from keyflip.prf.keys import ProgramKey
from tests.conftest import TWO_BRANCH_SOURCE


@pytest.mark.unit
def test_image_text_layout(two_branch_image: ProgramImage) -> None:
    """Test the header and section markers of the image format."""
    lines = save_image(two_branch_image).splitlines()
    assert lines[:5] == [
        "RVIMG v1",
        "base 00001000",
        "entry 00001000",
        "data_base 00002000",
        "CODE",
    ]
    assert lines[5] == f"{two_branch_image.code[0]:08x}"
    assert lines[-1] == "DATA"


@pytest.mark.integration
def test_image_round_trip_on_corpus(corpus: list[BenchSpec]) -> None:
    """Test load_image(save_image(img)) == img on every bundled benchmark."""
    for spec in corpus:
        image = spec.image()
        assert load_image(save_image(image)) == image, spec.name


@pytest.mark.unit
@pytest.mark.parametrize(
    "mutate",
    [
        lambda text: text.replace("RVIMG v1", "RVIMG v2"),
        lambda text: text.replace("RVIMG v1", "ELF"),
        lambda text: text.replace("entry 00001000", "entry 00001002"),
        lambda text: text.replace("base 00001000", "base zz"),
        lambda text: text.replace("CODE", "TEXT"),
        lambda text: text.replace("DATA", ""),
        lambda text: text.replace("\n00000013", "\n0013"),
        lambda text: text.replace("entry 00001000", "entry 00009000"),
        lambda text: "",
    ],
)
def test_malformed_images_rejected(mutate) -> None:
    """Test FormatError for every kind of malformed image."""
    image = ProgramImage(base_addr=0x1000, code=(0x00000013, 0x00000073), entry=0x1000)
    with pytest.raises(FormatError):
        load_image(mutate(save_image(image)))


@pytest.mark.unit
def test_image_data_round_trip() -> None:
    """Test that data longer than one line survives serialization."""
    image = ProgramImage(
        base_addr=0x1000,
        code=(0x00000073,),
        entry=0x1000,
        data_base=0x4000,
        data=bytes(range(70)),
    )
    text = save_image(image)
    assert len(text.split("DATA\n")[1].splitlines()) == 3
    assert load_image(text) == image


@pytest.mark.unit
def test_read_program_dispatches_on_suffix(tmp_path: Path, two_branch_image: ProgramImage) -> None:
    """Test that .rvimg files are loaded and anything else is assembled."""
    source = tmp_path / "prog.s"
    source.write_text(TWO_BRANCH_SOURCE, encoding="utf-8")
    image_path = tmp_path / "prog.rvimg"
    write_image(two_branch_image, image_path)
    assert read_program(source) == two_branch_image
    assert read_program(image_path) == two_branch_image


@pytest.mark.unit
def test_mask_text_layout() -> None:
    """Test the five-line sidecar with the lowest address in the top bit."""
    mask = MaskStream(base_addr=0x1000, bits=(0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1))
    assert save_mask(mask) == (
        "RVMASK v1\nbase 00001000\nwords 11\nencrypted: none\nbits 2420\n"
    )
    assert load_mask(save_mask(mask)) == mask


@pytest.mark.unit
def test_mask_file_round_trip(
    tmp_path: Path, two_branch_image: ProgramImage, flip_both_key: ProgramKey
) -> None:
    """Test write_mask/read_mask through the filesystem."""
    mask = make_mask(two_branch_image, flip_both_key)
    path = tmp_path / "prog.mask"
    write_mask(mask, path)
    assert read_mask(path) == mask
    assert mask.set_addresses() == {0x100C, 0x101C}


@pytest.mark.unit
@pytest.mark.parametrize(
    "text",
    [
        "RVMASK v2\nbase 00001000\nwords 2\nencrypted: none\nbits 00\n",
        "RVMASK v1\nbase 00001000\nwords 2\nencrypted: aes\nbits 00\n",
        "RVMASK v1\nbase 00001002\nwords 2\nencrypted: none\nbits 00\n",
        "RVMASK v1\nbase 00001000\nwords 2\nencrypted: none\nbits 0000\n",
        "RVMASK v1\nbase 00001000\nwords 2\nencrypted: none\nbits 20\n",
        "RVMASK v1\nbase 00001000\nwords two\nencrypted: none\nbits 00\n",
        "RVMASK v1\nbase 00001000\nencrypted: none\nbits 00\n",
    ],
)
def test_malformed_masks_rejected(text: str) -> None:
    """Test FormatError for malformed sidecars, including nonzero padding."""
    with pytest.raises(FormatError):
        load_mask(text)


@pytest.mark.unit
def test_mask_validation_against_image(two_branch_image: ProgramImage) -> None:
    """Test that a mask must match the image and mark only branches."""
    words = len(two_branch_image)
    MaskStream(0x1000, (0,) * words).validate_for(two_branch_image)
    with pytest.raises(MaskError):
        MaskStream(0x2000, (0,) * words).validate_for(two_branch_image)
    with pytest.raises(MaskError):
        MaskStream(0x1000, (0,) * (words - 1)).validate_for(two_branch_image)
    with pytest.raises(MaskError):
        MaskStream(0x1000, (1,) + (0,) * (words - 1)).validate_for(two_branch_image)
    with pytest.raises(MaskError):
        MaskStream(0x1000, (2,) * words)
