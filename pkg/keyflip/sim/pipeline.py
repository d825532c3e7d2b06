"""
Seven-stage in-order RV32I pipeline: IF1 IF2 ID EX MA1 MA2 WB.

Timing rules:
- predict not-taken; taken branches and jumps resolve at the end of EX and
  squash IF1/IF2/ID (3 cycles)
- full forwarding for ALU results; a load result is usable after MA2, so a
  consumer in ID waits while the load sits in EX or MA1
- on the hash-based cores a conditional branch starts its hash when it
  enters ID and cannot leave EX before the hash is ready; the hash unit is
  pipelined, so back-to-back branches overlap their latencies
- the cached core looks up the hash cache on ID entry; a hit costs nothing,
  a miss waits like the stalled core and fills the line when EX completes

Each instruction executes functionally on its first EX cycle. Fetch and
decode faults travel down the pipe and are raised only if they reach EX,
so wrong-path garbage past the end of the code is harmless.
"""

from dataclasses import dataclass
from enum import IntEnum

from keyflip.core.exceptions import (
    CycleLimitExceeded,
    KeyflipError,
    MemFault,
    UnsupportedInstruction,
    UnsupportedSyscall,
)
from keyflip.isa.codec import try_decode
from keyflip.isa.image import ProgramImage
from keyflip.isa.instructions import (
    MASK32,
    AluImm,
    AluOp,
    AluReg,
    Auipc,
    Branch,
    Ecall,
    Instruction,
    Jal,
    Jalr,
    Load,
    Lui,
    Store,
    sources,
    to_signed,
)
from keyflip.prf.hashing import hash_bit
from keyflip.sim.config import ArchKind, MicroArchConfig
from keyflip.sim.hash_cache import HashCache
from keyflip.sim.state import MachineState
from keyflip.sim.stats import CycleStats, TraceEntry

SYS_WRITE_BYTE = 64
SYS_EXIT = 93


class Stage(IntEnum):
    IF1 = 0
    IF2 = 1
    ID = 2
    EX = 3
    MA1 = 4
    MA2 = 5
    WB = 6


_ALU = {
    AluOp.ADD: lambda a, b: a + b,
    AluOp.SUB: lambda a, b: a - b,
    AluOp.SLL: lambda a, b: a << (b & 31),
    AluOp.SLT: lambda a, b: int(to_signed(a) < to_signed(b)),
    AluOp.SLTU: lambda a, b: int((a & MASK32) < (b & MASK32)),
    AluOp.XOR: lambda a, b: a ^ b,
    AluOp.SRL: lambda a, b: (a & MASK32) >> (b & 31),
    AluOp.SRA: lambda a, b: to_signed(a) >> (b & 31),
    AluOp.OR: lambda a, b: a | b,
    AluOp.AND: lambda a, b: a & b,
}


@dataclass(slots=True)
class Slot:
    """An instruction in flight."""

    pc: int
    word: int
    instr: Instruction | None
    fault: KeyflipError | None = None
    srcs: tuple[int, ...] = ()
    load_dest: int = 0
    hash_ready: int = 0
    cache_hit: bool = False
    executed: bool = False
    taken: bool | None = None
    d: int = 0
    redirect: int | None = None
    halts: bool = False


_Decoded = tuple[int, Instruction | None, KeyflipError | None, tuple[int, ...], int]


class Pipeline:
    """
    One simulation in progress. step_cycle() advances exactly one clock;
    after construction the entry instruction sits in IF1 for cycle 1.
    """

    def __init__(
        self,
        image: ProgramImage,
        config: MicroArchConfig,
        state: MachineState | None = None,
        stats: CycleStats | None = None,
    ):
        config.require_inputs()
        self.image = image
        self.config = config
        self.state = state if state is not None else MachineState.from_image(image)
        self.stats = stats if stats is not None else CycleStats()
        self.trace: list[TraceEntry] = []
        self.cache = HashCache(config.cache_lines) if config.kind is ArchKind.CACHED else None
        self.latency = config.hash.latency_cycles
        self.reversal_bits = self._reversal_bits()

        self._decoded: dict[int, _Decoded] = {}
        self.cycle = 1
        self.finished = False
        self.fetching = True
        self.fetch_pc = image.entry
        self.stages: list[Slot | None] = [None] * len(Stage)
        self.stages[Stage.IF1] = self._fetch()

    def _reversal_bits(self) -> dict[int, int]:
        """d bit per conditional-branch address for this core."""
        kind = self.config.kind
        if kind is ArchKind.BASELINE:
            return {}
        addrs = [
            self.image.addr_of(i)
            for i, word in enumerate(self.image.code)
            if isinstance(try_decode(word), Branch)
        ]
        if kind is ArchKind.MASK:
            mask = self.config.mask
            return {addr: mask.bit_at(addr) for addr in addrs}
        key = self.config.key
        return {addr: hash_bit(key, addr) for addr in addrs}

    # Fetch / decode

    def _decode(self, pc: int) -> _Decoded:
        if not self.image.contains(pc):
            return (0, None, MemFault(pc, "instruction fetch outside code"), (), 0)
        word = self.image.word_at(pc)
        try:
            instr = self.image.instruction_at(pc)
        except UnsupportedInstruction as exc:
            return (word, None, exc, (), 0)
        srcs = tuple(int(reg) for reg in sources(instr) if reg)
        load_dest = int(instr.rd) if isinstance(instr, Load) else 0
        return (word, instr, None, srcs, load_dest)

    def _fetch(self) -> Slot:
        pc = self.fetch_pc
        self.fetch_pc = (pc + 4) & MASK32
        decoded = self._decoded.get(pc)
        if decoded is None:
            decoded = self._decoded[pc] = self._decode(pc)
        word, instr, fault, srcs, load_dest = decoded
        return Slot(pc, word, instr, fault, srcs, load_dest)

    def _enter_id(self, slot: Slot, cycle: int) -> None:
        if not isinstance(slot.instr, Branch):
            return
        kind = self.config.kind
        if kind is ArchKind.STALLED:
            slot.hash_ready = cycle + self.latency
        elif kind is ArchKind.CACHED:
            bit = self.cache.lookup(slot.pc)
            if bit is None:
                slot.hash_ready = cycle + self.latency
            else:
                slot.cache_hit = True
                slot.d = bit

    # Execute

    def _execute(self, slot: Slot) -> None:
        if slot.fault is not None:
            raise slot.fault
        slot.executed = True
        instr = slot.instr
        pc = slot.pc
        regs = self.state.regs
        next_pc = (pc + 4) & MASK32

        if isinstance(instr, AluImm):
            regs[instr.rd] = _ALU[instr.op](regs[instr.rs1], instr.imm)
        elif isinstance(instr, AluReg):
            regs[instr.rd] = _ALU[instr.op](regs[instr.rs1], regs[instr.rs2])
        elif isinstance(instr, Branch):
            if not slot.cache_hit:
                slot.d = self.reversal_bits.get(pc, 0)
            static = instr.cond.evaluate(regs[instr.rs1], regs[instr.rs2])
            slot.taken = static != bool(slot.d)
            if slot.taken:
                next_pc = slot.redirect = (pc + instr.offset) & MASK32
        elif isinstance(instr, Load):
            addr = (regs[instr.base] + instr.offset) & MASK32
            regs[instr.rd] = self.state.mem.load(addr, instr.width.size, instr.width.signed)
        elif isinstance(instr, Store):
            addr = (regs[instr.base] + instr.offset) & MASK32
            self.state.mem.store(addr, instr.width.size, regs[instr.src])
        elif isinstance(instr, Lui):
            regs[instr.rd] = instr.imm20 << 12
        elif isinstance(instr, Auipc):
            regs[instr.rd] = pc + (instr.imm20 << 12)
        elif isinstance(instr, Jal):
            regs[instr.rd] = pc + 4
            next_pc = slot.redirect = (pc + instr.offset) & MASK32
        elif isinstance(instr, Jalr):
            target = (regs[instr.rs1] + instr.offset) & MASK32 & ~1
            regs[instr.rd] = pc + 4
            next_pc = slot.redirect = target
        elif isinstance(instr, Ecall):
            self._ecall(slot)

        self.state.pc = next_pc

    def _ecall(self, slot: Slot) -> None:
        regs = self.state.regs
        service = regs[17]
        if service == SYS_EXIT:
            self.state.halted = True
            self.state.exit_code = regs[10] & 0xFF
            slot.halts = True
        elif service == SYS_WRITE_BYTE:
            self.state.output.append(regs[10] & 0xFF)
        else:
            raise UnsupportedSyscall(service, slot.pc)

    # Clock

    def _load_use(self, consumer: Slot, *producers: Slot | None) -> bool:
        if not consumer.srcs:
            return False
        return any(
            p is not None and p.load_dest and p.load_dest in consumer.srcs for p in producers
        )

    def _complete_branch(self, slot: Slot) -> None:
        self.stats.branch_count += 1
        if self.cache is None:
            return
        if slot.cache_hit:
            self.stats.cache_hits += 1
        else:
            self.stats.cache_misses += 1
            self.cache.fill(slot.pc, slot.d)

    def _retire(self, slot: Slot, cycle: int) -> None:
        self.stats.retired += 1
        d = slot.d if slot.taken is not None else None
        self.trace.append(TraceEntry(cycle, slot.pc, slot.word, slot.taken, d))

    def step_cycle(self) -> None:
        """Advance the pipeline by one clock cycle."""
        if self.finished:
            return
        c = self.cycle
        stats = self.stats
        if1, if2, id_, ex, ma1, ma2, wb = self.stages

        ex_done = True
        if ex is not None:
            if not ex.executed:
                self._execute(ex)
            if ex.hash_ready > c:
                ex_done = False
                stats.hash_stall_cycles += 1

        if wb is not None:
            self._retire(wb, c)
            if wb.halts:
                self.finished = True
                stats.cycles = c

        if not ex_done:
            self.stages = [if1, if2, id_, ex, None, ma1, ma2]
        elif ex is not None and (ex.redirect is not None or ex.halts):
            if ex.taken is not None:
                self._complete_branch(ex)
            if ex.halts:
                self.fetching = False
            else:
                self.fetch_pc = ex.redirect
                stats.taken_flushes += 1
            new_if1 = self._fetch() if self.fetching else None
            self.stages = [new_if1, None, None, None, ex, ma1, ma2]
        else:
            if ex is not None and ex.taken is not None:
                self._complete_branch(ex)
            if id_ is not None and self._load_use(id_, ex, ma1):
                stats.load_use_stalls += 1
                self.stages = [if1, if2, id_, None, ex, ma1, ma2]
            else:
                if if2 is not None:
                    self._enter_id(if2, c + 1)
                new_if1 = self._fetch() if self.fetching else None
                self.stages = [new_if1, if1, if2, id_, ex, ma1, ma2]

        self.cycle = c + 1

    def run(self, max_cycles: int) -> None:
        """
        Step until the exit ECALL retires.

        Raises:
            CycleLimitExceeded: no halt within max_cycles
        """
        while not self.finished:
            if self.cycle > max_cycles:
                raise CycleLimitExceeded(max_cycles)
            self.step_cycle()

    def drain(self) -> None:
        """Retire everything older than EX; used after a fault so the trace is precise."""
        for stage in (Stage.WB, Stage.MA2, Stage.MA1):
            slot = self.stages[stage]
            if slot is not None:
                self._retire(slot, self.cycle)
                self.stages[stage] = None

    def occupancy(self) -> tuple[int | None, ...]:
        """pc held by each stage, IF1 first; None for a bubble."""
        return tuple(slot.pc if slot is not None else None for slot in self.stages)
