"""Pure-Python MT19937-64 and the documented uniform/normal mapping."""
import math
import sys

N, M = 312, 156
MATRIX_A = 0xB5026F5AA96619E9
UPPER, LOWER = 0xFFFFFFFF80000000, 0x7FFFFFFF
MASK = (1 << 64) - 1


class MT64:
    def __init__(self, seed):
        self.mt = [0] * N
        self.mt[0] = seed & MASK
        for i in range(1, N):
            self.mt[i] = (6364136223846793005 * (self.mt[i - 1] ^ (self.mt[i - 1] >> 62)) + i) & MASK
        self.i = N

    def next(self):
        if self.i >= N:
            for k in range(N):
                x = (self.mt[k] & UPPER) | (self.mt[(k + 1) % N] & LOWER)
                xa = x >> 1
                if x & 1:
                    xa ^= MATRIX_A
                self.mt[k] = self.mt[(k + M) % N] ^ xa
            self.i = 0
        x = self.mt[self.i]
        self.i += 1
        x ^= (x >> 29) & 0x5555555555555555
        x ^= (x << 17) & 0x71D67FFFEDA60000
        x ^= (x << 37) & 0xFFF7EEE000000000
        x ^= x >> 43
        return x & MASK

    def uniform(self):
        return (self.next() >> 11) * 2.0 ** -53

    def normal(self):
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)


if __name__ == "__main__":
    g = MT64(5489)
    for _ in range(9999):
        g.next()
    print("10000th default output", g.next())
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 2024
    g = MT64(seed)
    print("normals", [repr(g.normal()) for _ in range(4)])
    print("Phi(-1)", repr(0.5 * math.erfc(1.0 / math.sqrt(2.0))))
