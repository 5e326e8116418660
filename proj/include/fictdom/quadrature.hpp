#pragma once

// Fixed Gauss rules on the unit segment and reference triangle. Weights are
// normalized to sum to one; scale by the segment length or triangle area
// when integrating.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fictdom {

struct SegmentRule {
    std::vector<double> points;   // on [0,1]
    std::vector<double> weights;  // sum to 1
    int exactness_degree = 0;
};

inline SegmentRule gauss_segment(int n_points) {
    SegmentRule r;
    switch (n_points) {
        case 1:
            r.points = {0.5};
            r.weights = {1.0};
            r.exactness_degree = 1;
            break;
        case 2: {
            const double d = 0.5 / std::sqrt(3.0);
            r.points = {0.5 - d, 0.5 + d};
            r.weights = {0.5, 0.5};
            r.exactness_degree = 3;
            break;
        }
        case 3: {
            const double d = 0.5 * std::sqrt(3.0 / 5.0);
            r.points = {0.5 - d, 0.5, 0.5 + d};
            r.weights = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};
            r.exactness_degree = 5;
            break;
        }
        case 10: {
            const double x[5] = {0.013046735741414139961, 0.067468316655507744634,
                                 0.16029521585048779688, 0.2833023029353764046,
                                 0.42556283050918439456};
            const double w[5] = {0.033335672154344068797, 0.074725674575290296573,
                                 0.109543181257991022, 0.13463335965499817755,
                                 0.14776211235737643509};
            for (int i = 0; i < 5; ++i) {
                r.points.push_back(x[i]);
                r.weights.push_back(w[i]);
            }
            for (int i = 4; i >= 0; --i) {
                r.points.push_back(1.0 - x[i]);
                r.weights.push_back(w[i]);
            }
            r.exactness_degree = 19;
            break;
        }
        default:
            throw std::invalid_argument("gauss_segment: unsupported point count");
    }
    return r;
}

struct TriangleRule {
    std::vector<std::array<double, 3>> points;  // barycentric
    std::vector<double> weights;                // sum to 1
    int exactness_degree = 0;
};

namespace detail {

inline void push_orbit3(TriangleRule& r, double a, double w) {
    const double c = 1.0 - 2.0 * a;
    r.points.push_back({c, a, a});
    r.points.push_back({a, c, a});
    r.points.push_back({a, a, c});
    r.weights.insert(r.weights.end(), 3, w);
}

inline void push_orbit6(TriangleRule& r, double a, double b, double w) {
    const double c = 1.0 - a - b;
    r.points.push_back({a, b, c});
    r.points.push_back({b, a, c});
    r.points.push_back({a, c, b});
    r.points.push_back({c, a, b});
    r.points.push_back({b, c, a});
    r.points.push_back({c, b, a});
    r.weights.insert(r.weights.end(), 6, w);
}

}  // namespace detail

// Smallest symmetric rule with at least the requested polynomial exactness.
inline TriangleRule triangle_rule(int degree) {
    TriangleRule r;
    if (degree <= 1) {
        r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
        r.weights.push_back(1.0);
        r.exactness_degree = 1;
    } else if (degree <= 2) {
        detail::push_orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
        r.exactness_degree = 2;
    } else if (degree <= 4) {
        detail::push_orbit3(r, 0.44594849091596488632, 0.2233815896780114657);
        detail::push_orbit3(r, 0.09157621350977074346, 0.10995174365532186764);
        r.exactness_degree = 4;
    } else if (degree <= 6) {
        detail::push_orbit3(r, 0.24928674517091042129, 0.11678627572637936603);
        detail::push_orbit3(r, 0.06308901449150222834, 0.050844906370206816921);
        detail::push_orbit6(r, 0.31035245103378440542, 0.63650249912139864723,
                            0.082851075618373575194);
        r.exactness_degree = 6;
    } else {
        throw std::invalid_argument("triangle_rule: unsupported exactness degree");
    }
    return r;
}

}  // namespace fictdom
