"""Gate/transistor-level models of hierarchical wordline decoders.

A decoder is built from k-bit pre-decoder groups (inverters + NAND gates,
plus output inverters for the AND-AND family) and a structural post-decoder
stage that carries no transistors. Pre-decoder paths are enumerated per
(output, driving bit, transition direction) under single-input switching.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

NAND_NOR = "NAND_NOR"
AND_AND = "AND_AND"
FAMILIES = (NAND_NOR, AND_AND)

NMOS = "NMOS"
PMOS = "PMOS"
PULL_UP = "PULL_UP"
PULL_DOWN = "PULL_DOWN"

ACTIVATION = "ACTIVATION"  # output net rises
DEACTIVATION = "DEACTIVATION"  # output net falls


@dataclass(frozen=True)
class Transistor:
    tid: str
    device: str  # NMOS | PMOS
    gate_net: str
    network: str  # PULL_UP | PULL_DOWN
    stack_position: int


@dataclass(frozen=True)
class Gate:
    gid: str
    kind: str  # INV | NAND
    fanin: int
    input_nets: tuple
    output_net: str
    transistors: tuple


@dataclass(frozen=True)
class PreDecoder:
    group: int
    bits: tuple  # address bit indices, LSB of the group first
    gates: tuple  # topological order
    output_nets: tuple  # index = decoded group value


@dataclass(frozen=True)
class DecoderDesign:
    family: str
    address_width: int
    groups: tuple  # per group: tuple of address bit indices
    pre_decoders: tuple
    post_decoder_fanin: int
    timing_budget: float
    setup_time: float
    # lookup tables, derived at build time
    gate_by_id: dict = field(repr=False, default_factory=dict)
    driver_of: dict = field(repr=False, default_factory=dict)  # net -> gate id

    @property
    def n_wordlines(self):
        return 1 << self.address_width

    def group_bits(self, group):
        return self.groups[group]

    def group_size(self, group):
        return len(self.groups[group])

    def group_value(self, group, address):
        v = 0
        for i, bit in enumerate(self.groups[group]):
            v |= ((address >> bit) & 1) << i
        return v


@dataclass(frozen=True)
class Path:
    group: int
    output_index: int
    driving_bit: int
    through_inverter: bool
    direction: str  # ACTIVATION | DEACTIVATION
    gate_chain: tuple  # gate ids, input side first
    side_input_values: dict  # address-bit net -> required logic value
    output_net: str

    @property
    def pid(self):
        tag = "act" if self.direction == ACTIVATION else "deact"
        return f"g{self.group}_y{self.output_index}_b{self.driving_bit}_{tag}"


def _make_transistors(gid, kind, input_nets):
    """k parallel PMOS pull-up + k series NMOS pull-down (INV is the k=1 case)."""
    ts = []
    for i, net in enumerate(input_nets):
        ts.append(Transistor(f"{gid}_p{i}", PMOS, net, PULL_UP, i))
    for i, net in enumerate(input_nets):
        ts.append(Transistor(f"{gid}_n{i}", NMOS, net, PULL_DOWN, i))
    return tuple(ts)


def _gate(gid, kind, input_nets, output_net):
    return Gate(gid, kind, len(input_nets), tuple(input_nets), output_net,
                _make_transistors(gid, kind, input_nets))


def build_decoder(family=NAND_NOR, address_width=9, group_sizes=(3, 3, 3),
                  timing_budget=2.0, setup_time=0.2, output_buffers=None):
    """Build a hierarchical decoder design.

    group_sizes partitions the address bits LSB-first. output_buffers is an
    optional {(group, output_index): n_stages} map appending n_stages extra
    inverters (n_stages must be even, preserving the selected level) after
    the given pre-decoder output; used to construct lengthened-path fixtures.
    """
    if family not in FAMILIES:
        raise ConfigError(f"unknown decoder family {family!r}")
    if address_width < 2:
        raise ConfigError(f"address_width must be >= 2, got {address_width}")
    group_sizes = tuple(int(k) for k in group_sizes)
    for g, k in enumerate(group_sizes):
        if k < 1:
            raise ConfigError(f"group {g} has invalid size {k}")
    if sum(group_sizes) != address_width:
        raise ConfigError(
            f"group sizes {group_sizes} sum to {sum(group_sizes)}, "
            f"expected address_width {address_width}")
    output_buffers = dict(output_buffers or {})
    for (g, o), stages in output_buffers.items():
        if stages % 2 != 0 or stages < 2:
            raise ConfigError(
                f"output buffer at group {g} output {o} must have an even "
                f"positive stage count, got {stages}")

    groups = []
    start = 0
    for k in group_sizes:
        groups.append(tuple(range(start, start + k)))
        start += k

    pre_decoders = []
    for g, bits in enumerate(groups):
        k = len(bits)
        gates = []
        # one inverter per address bit of the group
        for bit in bits:
            gates.append(_gate(f"g{g}_invb{bit}", "INV", [f"a{bit}"], f"a{bit}_n"))
        output_nets = []
        for o in range(1 << k):
            inputs = []
            for i, bit in enumerate(bits):
                inputs.append(f"a{bit}" if (o >> i) & 1 else f"a{bit}_n")
            tail = []
            if family == AND_AND:
                tail.append(("INV", f"g{g}_outinv{o}"))
            for s in range(output_buffers.get((g, o), 0)):
                tail.append(("INV", f"g{g}_buf{o}_{s}"))
            nand_out = f"g{g}_y{o}" if not tail else f"g{g}_nand{o}"
            gates.append(_gate(f"g{g}_nand{o}", "NAND", inputs, nand_out))
            prev = nand_out
            for t, (kind, gid) in enumerate(tail):
                out = f"g{g}_y{o}" if t == len(tail) - 1 else f"{gid}_out"
                gates.append(_gate(gid, kind, [prev], out))
                prev = out
            output_nets.append(f"g{g}_y{o}")
        pre_decoders.append(PreDecoder(g, bits, tuple(gates), tuple(output_nets)))

    gate_by_id = {}
    driver_of = {}
    for pd in pre_decoders:
        for gate in pd.gates:
            gate_by_id[gate.gid] = gate
            if gate.output_net in driver_of:
                raise ConfigError(f"net {gate.output_net} driven twice")
            driver_of[gate.output_net] = gate.gid

    return DecoderDesign(
        family=family,
        address_width=address_width,
        groups=tuple(groups),
        pre_decoders=tuple(pre_decoders),
        post_decoder_fanin=len(groups) + 1,  # one net per group + decoder enable
        timing_budget=float(timing_budget),
        setup_time=float(setup_time),
        gate_by_id=gate_by_id,
        driver_of=driver_of,
    )


def load_design_config(path):
    """Parse a key=value decoder config file into build_decoder kwargs."""
    keys = {}
    with open(path) as f:
        for line_no, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            keys[key.strip()] = value.strip()
    kwargs = {}
    if "family" in keys:
        kwargs["family"] = keys["family"]
    if "address_width" in keys:
        kwargs["address_width"] = int(keys["address_width"])
    if "groups" in keys:
        kwargs["group_sizes"] = tuple(int(s) for s in keys["groups"].split(","))
    if "timing_budget" in keys:
        kwargs["timing_budget"] = float(keys["timing_budget"])
    if "setup_time" in keys:
        kwargs["setup_time"] = float(keys["setup_time"])
    return kwargs


def evaluate_nets(design, address):
    """Steady-state logic value of every net for one address input."""
    if not 0 <= address < design.n_wordlines:
        raise ConfigError(
            f"address {address} out of range for {design.address_width}-bit decoder")
    values = {}
    for bit in range(design.address_width):
        values[f"a{bit}"] = (address >> bit) & 1
    for pd in design.pre_decoders:
        for gate in pd.gates:  # construction order is topological
            ins = [values[n] for n in gate.input_nets]
            if gate.kind == "INV":
                out = 1 - ins[0]
            elif gate.kind == "NAND":
                out = 0 if all(ins) else 1
            else:
                raise ConfigError(f"unsupported gate kind {gate.kind}")
            values[gate.output_net] = out
    return values


def stress_states(design, address):
    """Per-transistor BTI stress under one static address.

    PMOS is stressed (NBTI bias) when its gate net is 0; NMOS is stressed
    (PBTI bias) when its gate net is 1.
    """
    nets = evaluate_nets(design, address)
    stress = {}
    for pd in design.pre_decoders:
        for gate in pd.gates:
            for t in gate.transistors:
                v = nets[t.gate_net]
                stress[t.tid] = (v == 0) if t.device == PMOS else (v == 1)
    return stress


def _chain_to_output(design, group, output_index, driving_bit):
    """Walk backward from the output net to the driving bit's entry gate."""
    pd = design.pre_decoders[group]
    pos = pd.bits.index(driving_bit)
    direct_net = f"a{driving_bit}"
    chain = []
    net = pd.output_nets[output_index]
    while True:
        gid = design.driver_of[net]
        gate = design.gate_by_id[gid]
        chain.append(gid)
        if gate.kind == "NAND":
            wanted = direct_net if (output_index >> pos) & 1 else f"a{driving_bit}_n"
            if wanted == direct_net:
                through_inverter = False
            else:
                chain.append(design.driver_of[wanted])
                through_inverter = True
            break
        net = gate.input_nets[0]
    chain.reverse()
    return tuple(chain), through_inverter


def enumerate_paths(design):
    """All sensitizable pre-decoder paths, in deterministic
    (group, output_index, driving_bit, direction) order."""
    paths = []
    for pd in design.pre_decoders:
        for o in range(len(pd.output_nets)):
            for pos, bit in enumerate(pd.bits):
                chain, through_inv = _chain_to_output(design, pd.group, o, bit)
                side = {}
                for i, other in enumerate(pd.bits):
                    if other != bit:
                        side[f"a{other}"] = (o >> i) & 1
                for direction in (ACTIVATION, DEACTIVATION):
                    paths.append(Path(
                        group=pd.group,
                        output_index=o,
                        driving_bit=bit,
                        through_inverter=through_inv,
                        direction=direction,
                        gate_chain=chain,
                        side_input_values=side,
                        output_net=pd.output_nets[o],
                    ))
    return paths


def group_truth_tables(design, group):
    """Value of every net of a group over its 2^k input values.

    Returns {net: uint8 array of length 2^k}; the sufficient statistic for
    turning group-value histograms into net duty factors.
    """
    pd = design.pre_decoders[group]
    k = len(pd.bits)
    n = 1 << k
    tables = {}
    for i, bit in enumerate(pd.bits):
        tables[f"a{bit}"] = np.array([(v >> i) & 1 for v in range(n)], dtype=np.uint8)
    for gate in pd.gates:
        ins = [tables[net] for net in gate.input_nets]
        if gate.kind == "INV":
            out = 1 - ins[0]
        else:  # NAND
            acc = ins[0].copy()
            for x in ins[1:]:
                acc &= x
            out = 1 - acc
        tables[gate.output_net] = out.astype(np.uint8)
    return tables
