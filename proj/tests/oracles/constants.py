"""Closed-form reference constants used by the test suites."""
import mpmath as mp

mp.mp.dps = 40


def kl(a, b):
    return a * mp.log(a / b) + (1 - a) * mp.log((1 - a) / (1 - b))


rows = {
    "log_cosh_1": mp.log(mp.cosh(1)),
    "kl_half_quarter": kl(mp.mpf("0.5"), mp.mpf("0.25")),
    "kl_02_half": kl(mp.mpf("0.2"), mp.mpf("0.5")),
    "averse_rhs_1": mp.sqrt(2 * mp.mpf("0.25") * kl(mp.mpf("0.5"), mp.mpf("0.25"))),
    "averse_rhs_2": mp.sqrt(2 * mp.mpf("0.25") * kl(mp.mpf("0.2"), mp.mpf("0.5"))),
    "sqrt6": mp.sqrt(6),
    "q2_product": mp.sqrt(2) * mp.mpf("0.3"),
    "w2_single": mp.sqrt(mp.mpf("0.3")),
    "lip2_L1": mp.sqrt(3) - 1,
    # stationary flip chains: conditional KL rate of flip b against flip a
    "markov_kl_rate_03_01": kl(mp.mpf("0.3"), mp.mpf("0.1")),
    # pair transfer matrix for f = s0*s1 on fair +-1 coins: largest eigenvalue of
    # [[e, 1/e],[1/e, e]]/2 is cosh(1)
    "pressure_pair": mp.log(mp.cosh(1)),
}
for k, v in rows.items():
    print(k, mp.nstr(v, 17))
