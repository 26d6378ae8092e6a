"""Intra-flow random linear network coding over GF(256), plus XOR inter-flow coding."""
from dataclasses import dataclass, field
from enum import Enum

from .gf256 import add_scaled, gf_inv, scale_row


@dataclass(frozen=True)
class SourceMessage:
    id: object
    payload: bytes
    k: int = 4

    @property
    def chunk_len(self):
        return len(self.payload) // self.k


@dataclass
class CodedPacket:
    message_id: object
    coeffs: tuple
    data: tuple
    origin: int = -1
    path_trace: list = field(default_factory=list)


def split_message(msg):
    if msg.k < 1 or not msg.payload or len(msg.payload) % msg.k:
        raise ValueError(
            f"payload of {len(msg.payload)} bytes cannot be split into k={msg.k} equal chunks"
        )
    n = len(msg.payload) // msg.k
    return [msg.payload[i * n:(i + 1) * n] for i in range(msg.k)]


def encode(chunks, coeffs):
    if len(chunks) != len(coeffs):
        raise ValueError(f"{len(coeffs)} coefficients for {len(chunks)} chunks")
    out = [0] * len(chunks[0])
    for c, chunk in zip(coeffs, chunks):
        out = add_scaled(out, chunk, c)
    return tuple(out)


def generate_coded_packets(msg, count, rng, origin=-1):
    """Draw ``count`` coded packets with uniform random coefficients.

    ``rng`` is a ``numpy.random.Generator``; coefficients are drawn as one
    ``(count, k)`` block so the first packets do not depend on ``count``.
    """
    chunks = split_message(msg)
    if count <= 0:
        return []
    coeff_block = rng.integers(0, 256, size=(count, msg.k), dtype="int64").tolist()
    return [
        CodedPacket(msg.id, tuple(row), encode(chunks, row), origin)
        for row in coeff_block
    ]


def recode(received, out_count, rng):
    """Random GF(256) combinations of already-coded packets of one message."""
    if not received:
        raise ValueError("recode needs at least one packet")
    mid = received[0].message_id
    width = len(received[0].coeffs)
    for p in received:
        if p.message_id != mid:
            raise ValueError("recode inputs belong to different messages")
        if len(p.coeffs) != width:
            raise ValueError("recode inputs have different coefficient lengths")
    weights = rng.integers(0, 256, size=(out_count, len(received)), dtype="int64").tolist()
    out = []
    for w in weights:
        coeffs = [0] * width
        data = [0] * len(received[0].data)
        for c, p in zip(w, received):
            coeffs = add_scaled(coeffs, p.coeffs, c)
            data = add_scaled(data, p.data, c)
        out.append(CodedPacket(mid, tuple(coeffs), tuple(data), received[0].origin))
    return out


class Ingest(Enum):
    INNOVATIVE = "innovative"
    REDUNDANT = "redundant"
    DECODED = "decoded"


class DecoderState:
    """Online Gaussian elimination; rows are kept in reduced echelon form.

    ``rows`` maps pivot column -> (coeff row, data row) with the pivot
    normalized to 1 and the pivot column cleared in every other row.
    """

    def __init__(self, message_id, k):
        self.message_id = message_id
        self.k = k
        self.rows = {}
        self.payload = None

    @property
    def rank(self):
        return len(self.rows)

    def ingest(self, pkt):
        if len(pkt.coeffs) != self.k:
            raise ValueError(f"coefficient vector of length {len(pkt.coeffs)}, expected {self.k}")
        if self.payload is not None:
            return Ingest.REDUNDANT, None
        coeffs = list(pkt.coeffs)
        data = list(pkt.data)
        for col, (prow, pdata) in self.rows.items():
            c = coeffs[col]
            if c:
                coeffs = add_scaled(coeffs, prow, c)
                data = add_scaled(data, pdata, c)
        pivot = next((i for i, c in enumerate(coeffs) if c), None)
        if pivot is None:
            return Ingest.REDUNDANT, None
        inv = gf_inv(coeffs[pivot])
        coeffs = scale_row(coeffs, inv)
        data = scale_row(data, inv)
        for col, (prow, pdata) in list(self.rows.items()):
            c = prow[pivot]
            if c:
                self.rows[col] = (add_scaled(prow, coeffs, c), add_scaled(pdata, data, c))
        self.rows[pivot] = (coeffs, data)
        if self.rank == self.k:
            self.payload = b"".join(bytes(self.rows[i][1]) for i in range(self.k))
            return Ingest.DECODED, self.payload
        return Ingest.INNOVATIVE, None


def decoder_ingest(state, pkt):
    if pkt.message_id != state.message_id:
        raise ValueError("packet belongs to another message")
    return state.ingest(pkt)


def gf_rank(matrix):
    """Rank of a small matrix over GF(256) by plain row reduction."""
    rows = [list(r) for r in matrix]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = gf_inv(rows[rank][col])
        rows[rank] = scale_row(rows[rank], inv)
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                rows[r] = add_scaled(rows[r], rows[rank], rows[r][col])
        rank += 1
    return rank


def xor_encode(p1, p2):
    if len(p1) != len(p2):
        raise ValueError("xor_encode needs equal-length packets")
    return bytes(a ^ b for a, b in zip(p1, p2))


def full_rank_probability(k, q=256):
    p = 1.0
    for i in range(1, k + 1):
        p *= 1.0 - q ** (-i)
    return p

