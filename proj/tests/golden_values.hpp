#pragma once

// Reference values from tests/oracles/matern_reference.py (mpmath, 50
// digits), frozen here. Regenerate with that script if the oracle changes.

#include <array>

#include "origins/geometry.hpp"

namespace origins::golden {

struct MaternCase {
  double distance;
  double smoothness;
  double value;  // sill 0.4, range 0.13
};

inline constexpr std::array<MaternCase, 20> kMatern{{
    {0.001, 1, 0.39993510636601476016},
    {0.01, 1, 0.39623220222212732472},
    {0.05, 1, 0.35222833756583027538},
    {0.13, 1, 0.2407628920788938299},
    {0.3, 1, 0.086825427233216931421},
    {0.7, 1, 0.0056885087204187992079},
    {1.5, 1, 0.000017125707503929874167},
    {0.001, 2, 0.39999408334210090027},
    {0.01, 2, 0.39941128890949889539},
    {0.05, 2, 0.38622043527662274134},
    {0.13, 2, 0.32496777972703549656},
    {0.3, 2, 0.17034207170308927735},
    {0.7, 2, 0.019749794368852432118},
    {1.5, 2, 0.00011190301246850592908},
    {0.002, 3, 0.39998816603052925067},
    {0.04, 3, 0.39532032312103147896},
    {0.13, 3, 0.3550631412368972253},
    {0.26, 3, 0.25895415637945366126},
    {0.6, 3, 0.066039565567376328617},
    {1.2, 3, 0.0024871024179076483683},
}};

// Matern at d = kappa for nu = 3; also the off-diagonal of two sites kappa apart.
inline constexpr double kMaternAtRangeNu3 = 0.3550631412368972253;

struct TwoSiteCase {
  LonLat s1;
  LonLat s2;
  double y1;
  double y2;
  LonLat target;
  double value;  // sill 0.4, range 0.13, nu 3, nugget 0.1
};

inline constexpr std::array<TwoSiteCase, 4> kTwoSite{{
    {{4.0, 8.0}, {4.13, 8.0}, 2, 3, {4.0, 8.0}, 2.0526017401203941213},
    {{4.0, 8.0}, {4.13, 8.0}, 2, 3, {4.065, 8.0}, 2.268030955006432995},
    {{4.0, 8.0}, {4.1, 8.1}, 3, 3, {4.2, 7.95}, 2.1990793533405723227},
    {{1.5, 6.5}, {1.55, 6.45}, 2, 2, {1.5, 6.45}, 1.7736463910679330452},
}};

}  // namespace origins::golden
