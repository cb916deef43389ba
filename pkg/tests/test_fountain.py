"""Fragmentation, droplet coding, peeling decode, oligo framing, screening."""

import random
import struct

import pytest

from dnavault.dna_codec import bytes_to_dna
from dnavault.errors import (
    ChecksumMismatch,
    EmptyInput,
    InsufficientDroplets,
    LengthError,
    ScreenStarvation,
)
from dnavault.fountain import (
    Droplet,
    OligoScreen,
    RobustSoliton,
    decode,
    droplet_plan,
    droplet_to_oligo,
    encode_droplets,
    fragment,
    oligo_to_droplet,
    read_oligo_file,
    recoverable_segments,
    screen_oligo,
    write_oligo_file,
)


def oracle_crc32(data: bytes) -> int:
    """Bit-by-bit CRC-32, reflected polynomial 0xEDB88320."""
    crc = 0xFFFFFFFF
    for byte in data:
        crc ^= byte
        for _ in range(8):
            crc = (crc >> 1) ^ (0xEDB88320 if crc & 1 else 0)
    return crc ^ 0xFFFFFFFF


def find_seed_covering(k: int, want: list[int], dist: RobustSoliton) -> int:
    """Search droplet seeds until one selects exactly ``want``."""
    for seed in range(200_000):
        degree, indices = droplet_plan(seed, k, dist)
        if indices == want:
            return seed
    raise AssertionError(f"no seed found covering {want}")


def make_droplet(seed: int, payload: bytes) -> Droplet:
    checksum = oracle_crc32(struct.pack(">I", seed) + payload)
    return Droplet(seed, payload, checksum)


# --- fragment -------------------------------------------------------------------

def test_fragment_pads_final_segment():
    segments, length = fragment(b"0123456789", 4)
    assert length == 10
    assert [s.payload for s in segments] == [b"0123", b"4567", b"89\x00\x00"]
    assert [s.index for s in segments] == [0, 1, 2]


def test_fragment_exact_and_oversized():
    segments, _ = fragment(b"abcd", 4)
    assert len(segments) == 1 and segments[0].payload == b"abcd"
    segments, length = fragment(b"x", 256)
    assert length == 1
    assert len(segments) == 1 and len(segments[0].payload) == 256


def test_fragment_rejects_empty():
    with pytest.raises(EmptyInput):
        fragment(b"", 4)
    with pytest.raises(ValueError):
        fragment(b"abc", 0)


# --- degree distribution ------------------------------------------------------------

def test_robust_soliton_is_a_distribution():
    for k in (1, 2, 10, 256, 1000):
        dist = RobustSoliton(k)
        assert len(dist.probabilities) == k
        assert all(p >= 0 for p in dist.probabilities)
        assert abs(sum(dist.probabilities) - 1.0) < 1e-9


def test_robust_soliton_single_segment():
    assert RobustSoliton(1).probabilities == [1.0]


def test_robust_soliton_rejects_bad_parameters():
    with pytest.raises(ValueError):
        RobustSoliton(0)
    with pytest.raises(ValueError):
        RobustSoliton(10, c=0)
    with pytest.raises(ValueError):
        RobustSoliton(10, delta=1.0)


def test_degree_spike_boosts_low_degrees():
    dist = RobustSoliton(100)
    # degree 1 carries more than the ideal soliton's 1/K
    assert dist.probabilities[0] > 1.0 / 100


# --- encoding ----------------------------------------------------------------------

def test_single_segment_droplets_are_identity():
    segments, _ = fragment(b"only one", 8)
    droplets = encode_droplets(segments, 5, rng_seed=3)
    assert all(d.degree == 1 for d in droplets)
    assert all(d.payload == segments[0].payload for d in droplets)


def test_degree_one_droplet_equals_selected_segment():
    data = random.Random(5).randbytes(16 * 8)
    segments, _ = fragment(data, 8)
    droplets = encode_droplets(segments, 60, rng_seed=11)
    ones = [d for d in droplets if d.degree == 1]
    assert ones, "expected at least one degree-1 droplet at this count"
    dist = RobustSoliton(len(segments))
    for d in ones:
        _, (index,) = droplet_plan(d.seed, len(segments), dist)
        assert d.payload == segments[index].payload


def test_encoding_is_deterministic_and_distinct():
    segments, _ = fragment(random.Random(1).randbytes(100), 10)
    a = encode_droplets(segments, 40, rng_seed=1984)
    b = encode_droplets(segments, 40, rng_seed=1984)
    assert a == b
    assert len({d.seed for d in a}) == len(a)
    assert a != encode_droplets(segments, 40, rng_seed=1985)


def test_stored_degree_matches_plan():
    segments, _ = fragment(random.Random(2).randbytes(64 * 4), 4)
    dist = RobustSoliton(len(segments))
    for d in encode_droplets(segments, 120, rng_seed=8):
        degree, indices = droplet_plan(d.seed, len(segments), dist)
        assert d.degree == degree == len(indices)


def test_screened_encoding_respects_screen():
    segments, _ = fragment(random.Random(3).randbytes(512), 32)
    screen = OligoScreen(max_homopolymer=4, gc_min=0.25, gc_max=0.75)
    droplets = encode_droplets(segments, 50, rng_seed=77, screen=screen)
    assert len(droplets) == 50
    assert all(screen.accepts(droplet_to_oligo(d)) for d in droplets)


# --- decoding ----------------------------------------------------------------------

def test_roundtrip_k32():
    data = random.Random(0).randbytes(32 * 32 - 5)
    segments, length = fragment(data, 32)
    droplets = encode_droplets(segments, 55, rng_seed=7)
    assert decode(droplets, 32, 32, length) == data


def test_decode_single_degree_one_droplet():
    segments, length = fragment(b"hello world!", 12)
    dist = RobustSoliton(1)
    seed = find_seed_covering(1, [0], dist)
    droplet = make_droplet(seed, segments[0].payload)
    assert decode([droplet], 1, 12, length) == b"hello world!"


def test_decode_two_segments_via_one_peel():
    segments, length = fragment(b"ABCDEFGH", 4)
    dist = RobustSoliton(2)
    seed0 = find_seed_covering(2, [0], dist)
    seed01 = find_seed_covering(2, [0, 1], dist)
    xor_payload = bytes(a ^ b for a, b in zip(segments[0].payload, segments[1].payload))
    droplets = [make_droplet(seed0, segments[0].payload), make_droplet(seed01, xor_payload)]
    assert decode(droplets, 2, 4, length) == b"ABCDEFGH"
    # the pair alone, without any degree-1 member, must stall at zero
    with pytest.raises(InsufficientDroplets) as info:
        decode([droplets[1]], 2, 4, length)
    assert info.value.recovered == 0


def test_decode_reports_partial_recovery():
    segments, length = fragment(b"ABCDEFGHIJKL", 4)  # K = 3
    dist = RobustSoliton(3)
    seed = find_seed_covering(3, [0], dist)
    with pytest.raises(InsufficientDroplets) as info:
        decode([make_droplet(seed, segments[0].payload)], 3, 4, length)
    assert info.value.recovered == 1
    assert info.value.needed == 3


def test_recoverable_segments_predicts_decode():
    data = random.Random(17).randbytes(48 * 8)
    segments, length = fragment(data, 8)
    k = len(segments)
    droplets = encode_droplets(segments, 90, rng_seed=6)
    recovered = recoverable_segments(droplets, k)
    if recovered == k:
        assert decode(droplets, k, 8, length) == data
    else:
        with pytest.raises(InsufficientDroplets) as info:
            decode(droplets, k, 8, length)
        assert info.value.recovered == recovered
    # a droplet set with no degree-1 member recovers nothing
    dist = RobustSoliton(2)
    seed01 = find_seed_covering(2, [0, 1], dist)
    assert recoverable_segments([make_droplet(seed01, b"\x00" * 4)], 2) == 0


def test_screen_starvation_is_reported():
    # one segment of zero bytes: every candidate oligo carries a huge A-run
    segments, _ = fragment(b"\x00" * 8, 8)
    with pytest.raises(ScreenStarvation):
        encode_droplets(segments, 3, rng_seed=1, screen=OligoScreen(max_homopolymer=4))


def test_randomized_roundtrips():
    # small K needs generous relative overhead; 2.5x keeps every seeded
    # draw comfortably above the peeling threshold
    rng = random.Random(42)
    for _ in range(10):
        size = rng.randrange(1, 700)
        seg = rng.choice([4, 8, 16])
        data = rng.randbytes(size)
        segments, length = fragment(data, seg)
        k = len(segments)
        droplets = encode_droplets(segments, max(k + 8, int(k * 2.5)), rng_seed=rng.randrange(2**32))
        assert decode(droplets, k, seg, length) == data


# --- oligo framing --------------------------------------------------------------------

def test_oligo_frame_layout_and_crc_oracle():
    droplet = make_droplet(0, b"\x00\x00\x00\x00")
    oligo = droplet_to_oligo(droplet)
    assert len(oligo) == 48  # 4 * (8 + 4)
    assert oligo.startswith("AAAA" * 4)  # zero seed
    expected_crc = oracle_crc32(b"\x00" * 8)
    assert oligo == bytes_to_dna(b"\x00" * 8 + struct.pack(">I", expected_crc))


def test_oligo_roundtrip_including_degree():
    segments, _ = fragment(random.Random(9).randbytes(96), 8)
    k = len(segments)
    dist = RobustSoliton(k)
    for droplet in encode_droplets(segments, 30, rng_seed=21):
        back = oligo_to_droplet(droplet_to_oligo(droplet), 8, k, dist)
        assert back == droplet


def test_oligo_substitution_detected():
    droplet = make_droplet(77, bytes(range(16)))
    oligo = droplet_to_oligo(droplet)
    for pos in (0, 5, 30, len(oligo) - 1):
        for base in "ACGT":
            if base == oligo[pos]:
                continue
            corrupted = oligo[:pos] + base + oligo[pos + 1 :]
            with pytest.raises(ChecksumMismatch):
                oligo_to_droplet(corrupted, 16)


def test_oligo_length_errors():
    droplet = make_droplet(1, b"abcd")
    oligo = droplet_to_oligo(droplet)
    with pytest.raises(LengthError):
        oligo_to_droplet(oligo[:-4], 4)
    with pytest.raises(LengthError):
        oligo_to_droplet(oligo, 5)


# --- screening -------------------------------------------------------------------------

def test_screen_examples():
    assert screen_oligo("ACGT", 3, 0.0, 1.0)
    assert not screen_oligo("AAAA", 3, 0.0, 1.0)
    assert not screen_oligo("GGCC", 3, 0.4, 0.6)  # GC fraction 1.0
    assert screen_oligo("AAAGGG", 3, 0.0, 1.0)
    assert not screen_oligo("AAAAG", 3, 0.0, 1.0)
    assert screen_oligo("", 3, 0.4, 0.6)


def test_screen_gc_window_boundaries():
    assert screen_oligo("ACGT", 4, 0.5, 0.5)  # exactly half GC
    assert not screen_oligo("ACGG", 4, 0.0, 0.5)
    assert screen_oligo("ACGG", 4, 0.75, 1.0)


# --- oligo file format --------------------------------------------------------------------

def test_oligo_file_roundtrip(tmp_path):
    segments, length = fragment(b"persist me please", 8)
    droplets = encode_droplets(segments, 9, rng_seed=31)
    oligos = [droplet_to_oligo(d) for d in droplets]
    path = tmp_path / "oligos.txt"
    write_oligo_file(path, oligos, len(segments), 8, length)
    text = path.read_text()
    assert text.splitlines()[0] == f"#K={len(segments)} SEG=8 LEN={length}"
    back, k, seg, ln = read_oligo_file(path)
    assert (back, k, seg, ln) == (oligos, len(segments), 8, length)


def test_oligo_file_rejects_missing_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("ACGT\n")
    with pytest.raises(ValueError):
        read_oligo_file(path)
