"""Smoke test for the pytreecodes extension.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`.
"""

import csv
import io
import math
import random

import pytreecodes as tc


def main():
    r0 = tc.cutoff_rate(0.01)
    # R0 = 1 - log2(1 + 2 sqrt(p(1-p))) on the BSC
    assert abs(r0 - (1 - math.log2(1 + 2 * math.sqrt(0.01 * 0.99)))) < 1e-12, r0
    ej, rho = tc.jelinek_exponent(0.01, r0, 0.5)
    assert abs(ej - 0.2382) < 1e-3 and 0 <= rho <= 1

    code = tc.LtiCode(8, 2, 30, seed=3)
    assert (code.n, code.k, code.horizon) == (8, 2, 30)
    again = tc.LtiCode.from_text(code.to_text())
    assert again.to_text() == code.to_text()

    rng = random.Random(0)
    msgs = [rng.randrange(4) for _ in range(30)]
    words = code.encode(msgs)
    # flip one bit in a few blocks; the decoder should still recover the message
    noisy = [w ^ (1 << rng.randrange(8)) if t % 7 == 3 else w for t, w in enumerate(words)]
    decoded, work = code.decode(noisy, 0.02)
    assert decoded == msgs, (decoded, msgs)
    assert len(work) == 30 and sum(work) >= 30

    text = tc.run_campaign("anytime", "p = 0.08\nn = 4\nk = 1\nhorizon = 12\ntrials = 200\nd_max = 8\n", seed=1)
    body = [l for l in text.splitlines() if not l.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    assert rows and {"d", "p_e"} <= rows[0].keys()
    assert text == tc.run_campaign("anytime", "p = 0.08\nn = 4\nk = 1\nhorizon = 12\ntrials = 200\nd_max = 8\n", seed=1)

    try:
        tc.run_campaign("nonsense")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown campaign accepted")
    print("pytreecodes smoke test passed")


if __name__ == "__main__":
    main()
