"""
Tests for the branch-reversal pass and static pairing.
"""

from random import Random

import pytest

from keyflip.asm.assembler import assemble
from keyflip.benchmarks.corpus import BenchSpec
from keyflip.core.exceptions import ShapeMismatch
from keyflip.isa.image import ProgramImage
from keyflip.isa.instructions import Branch, BranchCond
from keyflip.obfuscate import (
    ObfuscationReport,
    find_pairing_mismatch,
    make_mask,
    obfuscate_image,
    verify_pairing,
)
from keyflip.prf.hashing import flip_set
from keyflip.prf.keys import ProgramKey
from tests.conftest import FIRST_BRANCH, SECOND_BRANCH


@pytest.mark.unit
def test_both_branches_reversed(two_branch_image: ProgramImage, flip_both_key: ProgramKey) -> None:
    """Test that a key selecting both branches complements both conditions."""
    obfuscated, report = obfuscate_image(two_branch_image, flip_both_key)

    assert report.total_branches == 2
    assert report.flipped == 2
    assert report.flipped_addresses == (FIRST_BRANCH, SECOND_BRANCH)
    assert obfuscated.instruction_at(FIRST_BRANCH).cond is BranchCond.GE
    assert obfuscated.instruction_at(SECOND_BRANCH).cond is BranchCond.GE


@pytest.mark.unit
def test_only_branch_words_change(
    two_branch_image: ProgramImage, flip_second_key: ProgramKey
) -> None:
    """Test that layout, data and every non-selected word are untouched."""
    obfuscated, report = obfuscate_image(two_branch_image, flip_second_key)

    assert report.flipped_addresses == (SECOND_BRANCH,)
    assert obfuscated.base_addr == two_branch_image.base_addr
    assert obfuscated.entry == two_branch_image.entry
    assert obfuscated.data == two_branch_image.data
    changed = [
        two_branch_image.addr_of(i)
        for i, (a, b) in enumerate(zip(two_branch_image.code, obfuscated.code))
        if a != b
    ]
    assert changed == [SECOND_BRANCH]
    before = two_branch_image.instruction_at(SECOND_BRANCH)
    after = obfuscated.instruction_at(SECOND_BRANCH)
    assert isinstance(after, Branch)
    assert (after.rs1, after.rs2, after.offset) == (before.rs1, before.rs2, before.offset)


@pytest.mark.unit
def test_no_flip_key_leaves_image_identical(
    two_branch_image: ProgramImage, flip_none_key: ProgramKey
) -> None:
    """Test a key whose hash bit is zero at every branch."""
    obfuscated, report = obfuscate_image(two_branch_image, flip_none_key)
    assert report.flipped == 0
    assert obfuscated == two_branch_image


@pytest.mark.unit
def test_branchless_image_unchanged(rng: Random) -> None:
    """Test that an image without branches comes back byte-identical."""
    image = assemble("li a0, 7\nli a7, 93\necall\n")
    obfuscated, report = obfuscate_image(image, ProgramKey.generate(rng))
    assert obfuscated.code == image.code
    assert report.total_branches == 0
    assert report.flipped == 0


@pytest.mark.unit
def test_obfuscation_is_an_involution(two_branch_image: ProgramImage, rng: Random) -> None:
    """Test that obfuscating twice with the same key restores the image."""
    for _ in range(5):
        key = ProgramKey.generate(rng)
        once, _ = obfuscate_image(two_branch_image, key)
        twice, _ = obfuscate_image(once, key)
        assert twice == two_branch_image


@pytest.mark.unit
def test_report_render_never_shows_key(two_branch_image: ProgramImage) -> None:
    """Test the report text."""
    key = ProgramKey.from_hex("00112233445566778899aabbccddeeff")
    _, report = obfuscate_image(two_branch_image, key)
    text = report.render(source="prog.s")
    assert text.startswith("source: prog.s\n")
    assert f"key_fingerprint: {key.fingerprint()}" in text
    assert f"total_branches: {report.total_branches}" in text
    assert key.to_hex() not in text


@pytest.mark.unit
def test_report_validates_counts() -> None:
    """Test that inconsistent reports are rejected."""
    with pytest.raises(ValueError):
        ObfuscationReport(
            total_branches=1, flipped=2, flipped_addresses=(4, 8), key_fingerprint="0"
        )
    with pytest.raises(ValueError):
        ObfuscationReport(
            total_branches=2, flipped=2, flipped_addresses=(8, 4), key_fingerprint="0"
        )


@pytest.mark.unit
def test_mask_matches_flip_set(two_branch_image: ProgramImage, rng: Random) -> None:
    """Test that the sidecar marks exactly the flipped branches."""
    for _ in range(10):
        key = ProgramKey.generate(rng)
        mask = make_mask(two_branch_image, key)
        assert mask.set_addresses() == flip_set(key, two_branch_image)
        assert len(mask) == len(two_branch_image)


@pytest.mark.unit
def test_verify_pairing_accepts_fresh_output(
    two_branch_image: ProgramImage, flip_both_key: ProgramKey
) -> None:
    """Test that an image pairs with its own obfuscation."""
    obfuscated, _ = obfuscate_image(two_branch_image, flip_both_key)
    assert verify_pairing(two_branch_image, obfuscated, flip_both_key)


@pytest.mark.unit
def test_verify_pairing_reports_unflipped_branch(
    two_branch_image: ProgramImage, flip_both_key: ProgramKey
) -> None:
    """Test that undoing one reversal is located at that branch."""
    obfuscated, _ = obfuscate_image(two_branch_image, flip_both_key)
    code = list(obfuscated.code)
    index = two_branch_image.index_of(SECOND_BRANCH)
    code[index] = two_branch_image.code[index]
    tampered = obfuscated.with_code(code)

    assert not verify_pairing(two_branch_image, tampered, flip_both_key)
    mismatch = find_pairing_mismatch(two_branch_image, tampered, flip_both_key)
    assert mismatch.addr == SECOND_BRANCH
    assert mismatch.reason == "branch not reversed"
    assert mismatch.actual == two_branch_image.code[index]


@pytest.mark.unit
def test_verify_pairing_rejects_wrong_key(
    two_branch_image: ProgramImage, flip_both_key: ProgramKey, flip_none_key: ProgramKey
) -> None:
    """Test pairing under a key that disagrees on a branch."""
    obfuscated, _ = obfuscate_image(two_branch_image, flip_both_key)
    mismatch = find_pairing_mismatch(two_branch_image, obfuscated, flip_none_key)
    assert mismatch.addr == FIRST_BRANCH
    assert mismatch.reason == "branch unexpectedly changed"


@pytest.mark.unit
def test_verify_pairing_rejects_other_changes(
    two_branch_image: ProgramImage, flip_none_key: ProgramKey
) -> None:
    """Test that a modified non-branch word is caught."""
    code = list(two_branch_image.code)
    code[0] ^= 1 << 20
    mismatch = find_pairing_mismatch(
        two_branch_image, two_branch_image.with_code(code), flip_none_key
    )
    assert mismatch.addr == 0x1000
    assert mismatch.reason == "word changed"


@pytest.mark.unit
def test_verify_pairing_requires_same_shape(
    two_branch_image: ProgramImage, flip_none_key: ProgramKey
) -> None:
    """Test ShapeMismatch on images of different length."""
    shorter = ProgramImage(base_addr=0x1000, code=two_branch_image.code[:-1], entry=0x1000)
    with pytest.raises(ShapeMismatch):
        verify_pairing(two_branch_image, shorter, flip_none_key)


@pytest.mark.integration
def test_corpus_pairs_under_random_keys(corpus: list[BenchSpec], rng: Random) -> None:
    """Test pairing, involution and mask weight on every benchmark."""
    for spec in corpus:
        image = spec.image()
        for _ in range(3):
            key = ProgramKey.generate(rng)
            obfuscated, report = obfuscate_image(image, key)
            assert verify_pairing(image, obfuscated, key), spec.name
            assert report.total_branches == len(image.branch_addresses())
            assert obfuscate_image(obfuscated, key)[0] == image, spec.name
            assert make_mask(image, key).popcount() == report.flipped, spec.name
