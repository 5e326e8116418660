#pragma once

// Built-in manufactured problems. Each problem fixes the physical domain,
// the embedding box, the source and Dirichlet data, and the exact fields
// used for error measurement.

#include <functional>
#include <stdexcept>
#include <string>

#include "fictdom/geometry.hpp"

namespace fictdom {

struct ManufacturedProblem {
    std::string id;
    BBox box;                                      // embedding box
    PolygonBoundary boundary;                      // physical boundary gamma
    std::function<double(Point2)> source;          // f, defined on the whole box
    std::function<double(Point2)> dirichlet;       // g on gamma
    std::function<double(Point2)> exact_u;         // exact solution on the box
    std::function<Point2(Point2)> exact_grad_u;
    std::function<double(Point2)> exact_lambda;    // exact multiplier on gamma
};

// "paper": the unit square embedded in [-a, 1+a]^2 with the product of
// parabolas u(x,y) = (x+a)(1+a-x)(y+a)(1+a-y). The exact solution is smooth
// across gamma and vanishes on the box boundary, so the exact multiplier
// (the jump of the normal derivative across gamma) is identically zero.
inline ManufacturedProblem make_problem(const std::string& id, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("make_problem: margin a must be > 0");
    if (id != "paper") {
        throw std::invalid_argument("make_problem: unknown problem id '" + id + "'");
    }

    const auto para = [a](double t) { return (t + a) * (1.0 + a - t); };
    const auto dpara = [](double t) { return 1.0 - 2.0 * t; };  // d/dt of para

    ManufacturedProblem p{
        id,
        BBox{-a, -a, 1.0 + a, 1.0 + a},
        PolygonBoundary({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}),
        [para](Point2 q) { return 2.0 * (para(q.x) + para(q.y)); },
        [para](Point2 q) { return para(q.x) * para(q.y); },
        [para](Point2 q) { return para(q.x) * para(q.y); },
        [para, dpara](Point2 q) {
            return Point2{dpara(q.x) * para(q.y), para(q.x) * dpara(q.y)};
        },
        [](Point2) { return 0.0; },
    };
    return p;
}

}  // namespace fictdom
