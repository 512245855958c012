#pragma once

// Reference values produced by the scripts in this directory and frozen here.
// qp_dp_cvxpy.py: conic solves of Q_p and D_p on four fixed instances.
// markov_spread.py: LP solves of Q_1/|Lambda| and Q_inf for flip chains.
// dattes_mgf.py: 40-digit binomial sums for the sqrt-magnetization function.
// constants.py: closed forms.

#include <array>

namespace frozen {

struct QpRow {
  char instance;
  const char* p;
  double value;
};

// instances: A k=2 sites=2 mu~(1,2,3,4) nu~(4,1,2.5,2.5); B k=3 sites=1 mu~(2,5,3)
// nu~(6,1,3); C k=2 sites=3 mu~(1..8) nu~(8..1); D k=3 sites=2 mu~(1..9) nu~(x%4+1)
inline constexpr std::array<QpRow, 20> kQp = {{
    {'A', "1", 0.450000000000}, {'A', "3/2", 0.358267602045}, {'A', "2", 0.320156211871},
    {'A', "5", 0.264581022989}, {'A', "inf", 0.250000000000},
    {'B', "1", 0.4}, {'B', "3/2", 0.4}, {'B', "2", 0.4}, {'B', "5", 0.4}, {'B', "inf", 0.4},
    {'C', "1", 0.777777777778}, {'C', "3/2", 0.576822451868}, {'C', "2", 0.509175077217},
    {'C', "5", 0.447272799783}, {'C', "inf", 0.444444444444},
    {'D', "1", 0.330158730159}, {'D', "3/2", 0.262047157785}, {'D', "2", 0.233457476963},
    {'D', "5", 0.189626395110}, {'D', "inf", 0.165079365079},
}};
inline constexpr double kQpTol = 1e-8;

// flip chains 0.1 vs 0.3, stationary start; index n = 0..5
inline constexpr std::array<double, 6> kMarkovQ1PerSite = {0.0, 0.106666666667, 0.1328, 0.141870857143,
                                                           0.146710622222, 0.149721813527};
inline constexpr std::array<double, 6> kMarkovQinf = {0.0, 0.12, 0.134666666667, 0.144742, 0.148753082353,
                                                      0.151652048356};

struct DattesRow {
  long long L;
  double log_moment;
  double lip2;  // 0 when not computed
};
inline constexpr std::array<DattesRow, 8> kDattes = {{
    {1, 0.055874380186503547, 0.73205080756887729},
    {2, 0.092703787100176502, 0.87403204889764214},
    {3, 0.12162871168660281, 0.9501749624623209},
    {4, 0.14605677230144028, 1.0},
    {10, 0.25075262647822808, 1.1329099086021059},
    {100, 0.82964791136713297, 1.3177446878757825},
    {1000, 2.4725981545629422, 0.0},
    {10000, 6.8631033011434172, 0.0},
}};
inline constexpr double kDattesMeanL1 = 1.1830127018922193;
// log_moment / L^{1/4} at L = 100, 1000, 10000
inline constexpr std::array<double, 3> kDattesRatio = {0.26235770559216402, 0.4396970387559518, 0.68631033011434172};

inline constexpr double kLogCosh1 = 0.43378083048302719;
inline constexpr double kKlHalfQuarter = 0.14384103622589046;   // KL(Ber .5 | Ber .25)
inline constexpr double kKl02Half = 0.19274475702175743;        // KL(Ber .2 | Ber .5)
inline constexpr double kAverseRhs1 = 0.26818001065132582;      // sqrt(2 * 1/4 * kKlHalfQuarter)
inline constexpr double kAverseRhs2 = 0.31043900932530808;      // sqrt(2 * 1/4 * kKl02Half)
inline constexpr double kSqrt6 = 2.4494897427831781;
inline constexpr double kQ2Product = 0.42426406871192851;       // sqrt(2) * 0.3
inline constexpr double kW2Single = 0.54772255750516611;        // sqrt(0.3)
inline constexpr double kMarkovKlRate = 0.15366358680379865;    // flip 0.3 against flip 0.1

}  // namespace frozen
