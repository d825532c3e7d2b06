"""
Cycle-level tests of the seven-stage pipeline on all four core variants.
"""

import pytest

from keyflip.asm.assembler import assemble
from keyflip.benchmarks.corpus import get_benchmark
from keyflip.isa.image import ProgramImage
from keyflip.obfuscate import make_mask, obfuscate_image
from keyflip.prf.keys import ProgramKey
from keyflip.sim.config import MicroArchConfig
from keyflip.sim.pipeline import Pipeline, Stage
from keyflip.sim.runner import run

EXIT = "    li   a0, 0\n    li   a7, 93\n    ecall\n"

TAKEN_BRANCH = """\
    li   t0, 1
    bnez t0, target
    li   a0, 5
target:
""" + EXIT

NOT_TAKEN_BRANCH = """\
    li   t0, 1
    beq  t0, zero, done
    li   a0, 0
    li   a7, 93
done:
    ecall
"""

COUNTED_LOOP = """\
    li   t0, 5
loop:
    addi t0, t0, -1
    bnez t0, loop
""" + EXIT

JUMP_OVER = """\
    j    skip
    li   a0, 9
skip:
""" + EXIT

LOAD_USE = """\
    la   a0, value
    lw   t0, 0(a0)
    addi t1, t0, 1
""" + EXIT + """\
.data
value: .word 41
"""

LOAD_NOP_USE = LOAD_USE.replace("    addi t1", "    nop\n    addi t1")


def zero_key() -> ProgramKey:
    return ProgramKey(k_hi=0, k_lo=0)


def trusted_archs(image: ProgramImage, key: ProgramKey, latency: int) -> list[MicroArchConfig]:
    return [
        MicroArchConfig.stalled(key, latency),
        MicroArchConfig.cached(key, latency),
        MicroArchConfig.masked(make_mask(image, key)),
    ]


@pytest.mark.unit
@pytest.mark.parametrize("nops", [0, 1, 5])
def test_straight_line_takes_n_plus_six(nops: int) -> None:
    """Test that n instructions without hazards need n + 6 cycles."""
    image = assemble("    nop\n" * nops + EXIT)
    result = run(image, MicroArchConfig.baseline())
    assert result.stats.retired == nops + 3
    assert result.stats.cycles == nops + 3 + 6
    assert result.state.halted


@pytest.mark.unit
def test_taken_branch_costs_three_cycles() -> None:
    """Test the flush penalty of a taken branch on baseline."""
    result = run(assemble(TAKEN_BRANCH), MicroArchConfig.baseline())
    assert result.stats.retired == 5
    assert result.stats.cycles == 5 + 6 + 3
    assert result.stats.taken_flushes == 1
    assert result.stats.branch_count == 1
    assert result.retired_pcs() == [0x1000, 0x1004, 0x100C, 0x1010, 0x1014]


@pytest.mark.unit
def test_jump_costs_three_cycles() -> None:
    """Test that JAL flushes like a taken branch but is not a branch."""
    result = run(assemble(JUMP_OVER), MicroArchConfig.baseline())
    assert result.stats.retired == 4
    assert result.stats.cycles == 4 + 6 + 3
    assert result.stats.taken_flushes == 1
    assert result.stats.branch_count == 0


@pytest.mark.unit
def test_load_use_distance_one_stalls_two_cycles() -> None:
    """Test the load-use interlock for an immediate consumer."""
    result = run(assemble(LOAD_USE), MicroArchConfig.baseline())
    assert result.stats.load_use_stalls == 2
    assert result.stats.retired == 7
    assert result.stats.cycles == 7 + 6 + 2
    assert result.state.regs[6] == 42


@pytest.mark.unit
def test_load_use_distance_two_stalls_one_cycle() -> None:
    """Test the load-use interlock with one instruction in between."""
    result = run(assemble(LOAD_NOP_USE), MicroArchConfig.baseline())
    assert result.stats.load_use_stalls == 1
    assert result.stats.retired == 8
    assert result.stats.cycles == 8 + 6 + 1
    assert result.state.regs[6] == 42


@pytest.mark.unit
@pytest.mark.parametrize("latency", [1, 4, 8, 16])
def test_stalled_core_adds_latency_minus_one(latency: int) -> None:
    """Test that each dynamic branch costs L - 1 extra cycles on the stalled core."""
    image = assemble(TAKEN_BRANCH)
    obfuscated, _ = obfuscate_image(image, zero_key())
    baseline = run(image, MicroArchConfig.baseline())
    stalled = run(obfuscated, MicroArchConfig.stalled(zero_key(), latency))
    assert stalled.stats.cycles - baseline.stats.cycles == latency - 1
    assert stalled.stats.hash_stall_cycles == latency - 1
    assert stalled.retired_pcs() == baseline.retired_pcs()


@pytest.mark.unit
def test_stalled_branch_occupies_ex_for_latency_cycles() -> None:
    """Test that a branch entering ID at cycle 4 holds EX through cycle 4 + L."""
    latency = 4
    image = assemble(NOT_TAKEN_BRANCH)
    pipeline = Pipeline(image, MicroArchConfig.stalled(zero_key(), latency))

    seen = {}
    while not pipeline.finished:
        seen[pipeline.cycle] = pipeline.occupancy()
        pipeline.step_cycle()

    assert seen[4][Stage.ID] == 0x1004
    for cycle in range(5, 5 + latency):
        assert seen[cycle][Stage.EX] == 0x1004, cycle
        assert seen[cycle][Stage.ID] == 0x1008, cycle
    assert seen[5 + latency][Stage.EX] == 0x1008
    assert seen[5 + latency][Stage.MA1] == 0x1004
    assert pipeline.stats.cycles == 11 + latency - 1


@pytest.mark.unit
def test_cache_hit_adds_no_occupancy() -> None:
    """Test that a pre-filled hash cache makes the branch cost nothing."""
    image = assemble(NOT_TAKEN_BRANCH)
    pipeline = Pipeline(image, MicroArchConfig.cached(zero_key(), 16))
    pipeline.cache.fill(0x1004, 0)
    pipeline.run(1000)

    assert pipeline.stats.cycles == 11
    assert pipeline.stats.cache_hits == 1
    assert pipeline.stats.cache_misses == 0
    assert pipeline.stats.hash_stall_cycles == 0


@pytest.mark.unit
def test_loop_timing_on_every_core() -> None:
    """Test a five-iteration loop on baseline and the three trusted cores."""
    latency = 16
    key = zero_key()
    image = assemble(COUNTED_LOOP)
    obfuscated, _ = obfuscate_image(image, key)

    baseline = run(image, MicroArchConfig.baseline())
    stalled = run(obfuscated, MicroArchConfig.stalled(key, latency))
    cached = run(obfuscated, MicroArchConfig.cached(key, latency))
    masked = run(obfuscated, MicroArchConfig.masked(make_mask(image, key)))

    assert baseline.stats.retired == 14
    assert baseline.stats.cycles == 14 + 6 + 4 * 3
    assert stalled.stats.cycles == baseline.stats.cycles + 5 * (latency - 1)
    assert cached.stats.cycles == baseline.stats.cycles + (latency - 1)
    assert (cached.stats.cache_hits, cached.stats.cache_misses) == (4, 1)
    assert cached.stats.cache_hit_rate == pytest.approx(0.8)
    assert masked.stats.cycles == baseline.stats.cycles
    for result in (stalled, cached, masked):
        assert result.retired_pcs() == baseline.retired_pcs()
        assert result.stats.branch_count == 5


@pytest.mark.integration
def test_branchless_occupancy_identical_on_every_core() -> None:
    """Test that code without branches never sees the hash path."""
    image = get_benchmark("matmul-int").image()
    key = zero_key()

    def schedule(config: MicroArchConfig) -> list[tuple[int | None, ...]]:
        pipeline = Pipeline(image, config)
        occupancy = []
        while not pipeline.finished:
            occupancy.append(pipeline.occupancy())
            pipeline.step_cycle()
        return occupancy

    reference = schedule(MicroArchConfig.baseline())
    for config in trusted_archs(image, key, 16):
        assert schedule(config) == reference, config.label


@pytest.mark.unit
def test_entry_instruction_starts_in_if1() -> None:
    """Test the pipeline state right after construction."""
    pipeline = Pipeline(assemble(EXIT), MicroArchConfig.baseline())
    assert pipeline.cycle == 1
    assert pipeline.occupancy() == (0x1000, None, None, None, None, None, None)
    pipeline.step_cycle()
    assert pipeline.occupancy()[: Stage.ID + 1] == (0x1004, 0x1000, None)


@pytest.mark.unit
def test_wrong_path_garbage_is_harmless() -> None:
    """Test that undecodable words fetched after a jump or exit never fault."""
    image = assemble(
        """
            j    over
            .word 0xffffffff
        over:
            li   a0, 0
            li   a7, 93
            ecall
            .word 0xffffffff
            .word 0xffffffff
        """
    )
    result = run(image, MicroArchConfig.baseline())
    assert result.state.exit_code == 0
    assert 0x1004 not in result.retired_pcs()


@pytest.mark.unit
def test_trace_records_branch_outcomes() -> None:
    """Test trace lines for a taken branch."""
    result = run(assemble(TAKEN_BRANCH), MicroArchConfig.baseline())
    branch = result.trace[1]
    assert branch.taken is True
    assert branch.d == 0
    assert branch.format().endswith(" 00001004 " + f"{branch.word:08x}" + " B taken d=0")
    assert result.trace[0].taken is None
    assert result.trace[0].format().count(" ") == 2
