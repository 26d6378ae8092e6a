"""Two packets, two receivers, one coded transmission in the middle of the butterfly."""
from rlnc_resilience.codec import xor_encode

p1, p2 = b"hello", b"world"
print("s sends p1 via A and p2 via B; t1 overhears p1, t2 overhears p2")
coded = xor_encode(p1, p2)
print(f"C forwards a single packet p1^p2 = {coded.hex()} through D")
print("t1 recovers", xor_encode(coded, p1))
print("t2 recovers", xor_encode(coded, p2))
