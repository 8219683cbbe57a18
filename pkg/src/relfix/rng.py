"""Platform-stable seeded randomness.

All randomized code in the package draws from SplitMix64, so a seed means
the same instance in any language that reproduces these few lines:

    state  <- state + 0x9E3779B97F4A7C15            (mod 2**64)
    z      <- state
    z      <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  (mod 2**64)
    z      <- (z ^ (z >> 27)) * 0x94D049BB133111EB  (mod 2**64)
    output <- z ^ (z >> 31)

Floats are ``(output >> 11) * 2**-53``; bounded integers are
``output % bound``.  Independent substreams (one per sample, one per seed
in a mining run) come from :func:`derive_seed`, so results never depend on
the order in which workers consume them.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed, *keys):
    """Fold integer keys into a seed: s <- mix64(s ^ mix64(key + GOLDEN))."""
    s = seed & MASK64
    for key in keys:
        s = mix64(s ^ mix64((key + GOLDEN) & MASK64))
    return s


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK64

    def next_u64(self):
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def uniform(self, lo=0.0, hi=1.0):
        u = (self.next_u64() >> 11) * (1.0 / (1 << 53))
        return lo + (hi - lo) * u

    def below(self, bound):
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound

    def bernoulli(self, p):
        return self.uniform() < p

    def substream(self, *keys):
        return SplitMix64(derive_seed(self.state, *keys))
