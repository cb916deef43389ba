"""Walkthrough: the DNA codec layer.

Bytes map to bases two bits at a time (A=00, C=01, G=10, T=11), sequences
read back as integers, integers factor through a rho-style walk, and a
sequence can key a symmetric XOR cipher. Run it:

    python demos/01_dna_codec.py
"""

from dnavault.dna_codec import (
    bytes_to_dna,
    cgk_factorize,
    dna_to_bytes,
    dna_to_number,
    keystream_encrypt,
    number_to_dna,
)
from dnavault.errors import NotFactorable

print("=" * 70)
print("1. BYTES <-> BASES")
print("=" * 70)
for raw in (b"\x00", b"\xff", b"\x1b", b"hi"):
    seq = bytes_to_dna(raw)
    print(f"  {raw!r:12} -> {seq:12} -> {dna_to_bytes(seq)!r}")

print()
print("=" * 70)
print("2. SEQUENCES AS NUMBERS")
print("=" * 70)
for seq in ("A", "GC", "TT", "CTG"):
    print(f"  {seq:4} -> {dna_to_number(seq)}")
for value in (0, 5, 15, 1000):
    print(f"  {value:5} -> {number_to_dna(value)}")

print()
print("=" * 70)
print("3. FACTORING A DNA-ENCODED NUMBER")
print("=" * 70)
seq = number_to_dna(8051)
print(f"  factoring {seq} (= 8051), offset M=1")
pair, trace = cgk_factorize(seq, 1)
print(f"  -> {pair.p} x {pair.q} = {pair.p * pair.q}")
print(f"  -> as sequences: p={pair.p_dna} q={pair.q_dna}")
print(f"  -> walk visited {len(trace.iterations)} (x, y, gcd) triples, {trace.retries} restarts")
for x, y, d in trace.iterations[:5]:
    print(f"       x={x:5}  y={y:5}  gcd={d}")

print()
print("  primes exhaust their retries instead of looping forever:")
try:
    cgk_factorize(number_to_dna(9973), 1, max_retries=4)
except NotFactorable as exc:
    print(f"  -> {exc}")

print()
print("=" * 70)
print("4. SEQUENCES AS CIPHER KEYS")
print("=" * 70)
message = b"the vault hides in the helix"
key = "GATTACA"
ciphertext = keystream_encrypt(message, key)
print(f"  plaintext : {message!r}")
print(f"  key       : {key}")
print(f"  ciphertext: {ciphertext.hex()}")
print(f"  decrypted : {keystream_encrypt(ciphertext, key)!r}")
print(f"  wrong key : {keystream_encrypt(ciphertext, 'GATTACC')!r}")
