"""Minimal EVM event codec: keccak-256 topics plus head-word ABI decoding.

No keccak implementation ships with the standard library (hashlib's sha3 is
the NIST-padded variant), so the permutation is implemented here and pinned
to published known-answer vectors in the test suite.

Vote events are decoded by convention rather than full ABI metadata:

* the first ``address`` parameter is the voter (assumed topic-indexed when
  the signature carries no explicit ``indexed`` markers),
* the first two remaining integer-valued parameters, in declaration order,
  are the proposal id and the raw support value (``bool`` counts as an
  integer: 0 or 1),
* every other parameter is ignored.

This covers GovernorBravo-style ``VoteCast(address,uint256,uint8,...)``
layouts with the bare canonical signature, and Aragon-style layouts when
the registry spells out ``indexed`` markers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import MalformedData

_MASK64 = (1 << 64) - 1

_ROUND_CONSTANTS = (
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A, 0x8000000080008000,
    0x000000000000808B, 0x0000000080000001, 0x8000000080008081, 0x8000000000008009,
    0x000000000000008A, 0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089, 0x8000000000008003,
    0x8000000000008002, 0x8000000000000080, 0x000000000000800A, 0x800000008000000A,
    0x8000000080008081, 0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
)

# rho rotation offsets indexed [x][y]
_ROTATION = (
    (0, 36, 3, 41, 18),
    (1, 44, 10, 45, 2),
    (62, 6, 43, 15, 61),
    (28, 55, 25, 21, 56),
    (27, 20, 39, 8, 14),
)


def _rotl(value: int, shift: int) -> int:
    if shift == 0:
        return value
    return ((value << shift) | (value >> (64 - shift))) & _MASK64


def _keccak_f(state: list[int]) -> list[int]:
    for rc in _ROUND_CONSTANTS:
        c = [state[x] ^ state[x + 5] ^ state[x + 10] ^ state[x + 15] ^ state[x + 20]
             for x in range(5)]
        d = [c[(x - 1) % 5] ^ _rotl(c[(x + 1) % 5], 1) for x in range(5)]
        state = [state[i] ^ d[i % 5] for i in range(25)]
        b = [0] * 25
        for x in range(5):
            for y in range(5):
                b[y + 5 * ((2 * x + 3 * y) % 5)] = _rotl(state[x + 5 * y], _ROTATION[x][y])
        state = [
            b[i] ^ ((~b[(i + 1) % 5 + 5 * (i // 5)]) & b[(i + 2) % 5 + 5 * (i // 5)])
            for i in range(25)
        ]
        state[0] ^= rc
    return state


def keccak256(data: bytes) -> bytes:
    """keccak-256 digest (rate 1088, multi-rate 10*1 padding)."""
    rate = 136
    state = [0] * 25
    padded = bytearray(data)
    padded.append(0x01)
    padded.extend(b"\x00" * (-len(padded) % rate))
    padded[-1] ^= 0x80
    for start in range(0, len(padded), rate):
        block = padded[start:start + rate]
        for i in range(rate // 8):
            state[i] ^= int.from_bytes(block[8 * i:8 * i + 8], "little")
        state = _keccak_f(state)
    return b"".join(state[i].to_bytes(8, "little") for i in range(4))


_TYPE_RE = re.compile(r"^(address|bool|string|bytes|bytes\d+|uint\d*|int\d*)$")
_DYNAMIC_TYPES = ("string", "bytes")


def _canonical_type(abi_type: str) -> str:
    if abi_type == "uint":
        return "uint256"
    if abi_type == "int":
        return "int256"
    return abi_type


def _is_integerish(abi_type: str) -> bool:
    return abi_type == "bool" or abi_type.startswith(("uint", "int"))


@dataclass(frozen=True)
class EventParam:
    type: str
    name: str = ""
    indexed: bool = False


@dataclass(frozen=True)
class EventAbi:
    """Parsed vote-event signature with topic/data slot assignments."""

    name: str
    params: tuple[EventParam, ...]

    @property
    def canonical(self) -> str:
        return f"{self.name}({','.join(p.type for p in self.params)})"

    @property
    def topic0(self) -> str:
        return "0x" + keccak256(self.canonical.encode("ascii")).hex()

    @property
    def voter_index(self) -> int:
        for i, p in enumerate(self.params):
            if p.type == "address":
                return i
        raise AssertionError("validated at parse time")


def parse_event_signature(signature: str) -> EventAbi:
    """Parse ``Name(type [indexed] [name], ...)`` into an EventAbi.

    Raises ValueError for signatures a vote decoder cannot use: no
    ``address`` voter parameter, or fewer than two integer-valued
    parameters for (proposal id, support).
    """
    match = re.fullmatch(r"\s*(\w+)\s*\((.*)\)\s*", signature)
    if match is None:
        raise ValueError(f"not an event signature: {signature!r}")
    name, body = match.group(1), match.group(2).strip()
    if not body:
        raise ValueError(f"vote event needs parameters: {signature!r}")
    params: list[EventParam] = []
    saw_indexed = False
    for raw in body.split(","):
        tokens = raw.split()
        if not tokens:
            raise ValueError(f"empty parameter in {signature!r}")
        abi_type = _canonical_type(tokens[0])
        if not _TYPE_RE.match(abi_type):
            raise ValueError(f"unsupported parameter type {tokens[0]!r}")
        indexed = len(tokens) > 1 and tokens[1] == "indexed"
        name_tokens = tokens[2:] if indexed else tokens[1:]
        if len(name_tokens) > 1:
            raise ValueError(f"cannot parse parameter {raw.strip()!r}")
        if indexed and abi_type in _DYNAMIC_TYPES:
            raise ValueError(f"indexed dynamic parameter unsupported in {signature!r}")
        saw_indexed = saw_indexed or indexed
        params.append(EventParam(abi_type, name_tokens[0] if name_tokens else "", indexed))
    if not saw_indexed:
        # bare canonical signature: governor convention, voter topic-indexed
        for i, p in enumerate(params):
            if p.type == "address":
                params[i] = EventParam(p.type, p.name, True)
                break
    abi = EventAbi(name, tuple(params))
    if not any(p.type == "address" for p in params):
        raise ValueError(f"no address (voter) parameter in {signature!r}")
    integer_params = [p for i, p in enumerate(params)
                      if i != abi.voter_index and _is_integerish(p.type)]
    if len(integer_params) < 2:
        raise ValueError(f"need proposal and support parameters in {signature!r}")
    return abi


def _strip_0x(value: str) -> str:
    return value[2:] if value.startswith(("0x", "0X")) else value


def decode_fields(abi: EventAbi, topics: tuple[str, ...], data: str) -> dict[int, int | str]:
    """Decode per-parameter values; addresses as hex strings, ints as ints.

    Dynamic data parameters decode to their head offsets and are never used
    by callers. Raises MalformedData on short topics/data segments.
    """
    indexed = [p for p in abi.params if p.indexed]
    if len(topics) != 1 + len(indexed):
        raise MalformedData(
            f"expected {1 + len(indexed)} topics, got {len(topics)}")
    try:
        blob = bytes.fromhex(_strip_0x(data))
    except ValueError as exc:
        raise MalformedData(f"data segment is not hex: {exc}") from exc
    head_count = sum(1 for p in abi.params if not p.indexed)
    if len(blob) < 32 * head_count:
        raise MalformedData(
            f"data segment too short: {len(blob)} bytes for {head_count} words")
    values: dict[int, int | str] = {}
    topic_pos, word_pos = 1, 0
    for i, param in enumerate(abi.params):
        if param.indexed:
            word_hex = _strip_0x(topics[topic_pos])
            if len(word_hex) != 64:
                raise MalformedData(f"topic {topic_pos} is not 32 bytes")
            word = bytes.fromhex(word_hex)
            topic_pos += 1
        else:
            word = blob[32 * word_pos:32 * word_pos + 32]
            word_pos += 1
        if param.type == "address":
            values[i] = "0x" + word[-20:].hex()
        else:
            values[i] = int.from_bytes(word, "big")
    return values


def vote_fields(abi: EventAbi, values: dict[int, int | str]) -> tuple[str, int, int]:
    """Extract (voter, proposal_id, support) per the decoding convention."""
    voter = values[abi.voter_index]
    assert isinstance(voter, str)
    integers = [values[i] for i, p in enumerate(abi.params)
                if i != abi.voter_index and _is_integerish(p.type)]
    return voter, int(integers[0]), int(integers[1])


def encode_vote_data(abi: EventAbi, voter: str, proposal_id: int,
                     support: int) -> tuple[tuple[str, ...], str]:
    """Build (topics, data) for a synthetic log of this event.

    Integer parameters beyond proposal/support encode as zero; dynamic
    parameters as empty. Inverse of decode for the fields a VoteEvent keeps.
    """
    integer_slots = [i for i, p in enumerate(abi.params)
                     if i != abi.voter_index and _is_integerish(p.type)]
    assigned = {integer_slots[0]: proposal_id, integer_slots[1]: support}
    topics = [abi.topic0]
    head: list[bytes] = []
    tail: list[bytes] = []
    data_params = [p for p in abi.params if not p.indexed]
    tail_offset = 32 * len(data_params)
    for i, param in enumerate(abi.params):
        if param.type == "address":
            word = bytes(12) + bytes.fromhex(_strip_0x(voter))
        elif param.type in _DYNAMIC_TYPES:
            word = tail_offset.to_bytes(32, "big")
            tail.append((0).to_bytes(32, "big"))  # zero-length payload
            tail_offset += 32
        else:
            word = assigned.get(i, 0).to_bytes(32, "big")
        if param.indexed:
            topics.append("0x" + word.hex())
        else:
            head.append(word)
    return tuple(topics), "0x" + b"".join(head + tail).hex()
