#pragma once

// Suspension models: a hyperbolic SL(2,Z) automorphism suspended under a
// positive trigonometric-polynomial roof, plus exactly volume-preserving
// shear perturbations of the time-1 map. All derivatives to order 3 are
// closed-form.
//
// Coordinates: p = (x, y, s) with (x, y) on the 2-torus and 0 <= s < r(x, y).
// The roof identification is (x, y, r(x,y)) ~ (A(x,y), 0).

#include <cstdint>
#include <string>
#include <vector>

#include "alab/errors.hpp"
#include "alab/geom.hpp"
#include "alab/jet.hpp"

namespace alab {

struct TorusAutomorphism {
    std::int64_t a = 2, b = 1, c = 1, d = 1;  // [[a,b],[c,d]]
    double expandingEigenvalue = 0;           // lambda, |lambda| > 1
    Vec2 expandingDir, contractingDir;        // unit eigenvectors

    void finalize();  // checks hyperbolicity, fills eigendata
    Vec2 apply(const Vec2& v) const {
        return {double(a) * v.x + double(b) * v.y, double(c) * v.x + double(d) * v.y};
    }
    Vec2 applyInverse(const Vec2& v) const {
        double det = double(a * d - b * c);
        return {(double(d) * v.x - double(b) * v.y) / det,
                (-double(c) * v.x + double(a) * v.y) / det};
    }
    Mat2 matrix() const {
        Mat2 M;
        M.m[0][0] = double(a); M.m[0][1] = double(b);
        M.m[1][0] = double(c); M.m[1][1] = double(d);
        return M;
    }
};

struct RoofFunction {
    struct Term {
        int m = 0, n = 0;        // frequency vector
        double cosAmp = 0, sinAmp = 0;
    };
    double constant = 1.0;
    std::vector<Term> terms;

    double minValue = 0;  // filled by finalize(), certified > 0

    double value(const Vec2& q) const;
    Vec2 grad(const Vec2& q) const;
    void hess(const Vec2& q, double h[2][2]) const;
    void third(const Vec2& q, double t[2][2][2]) const;
    void finalize();
};

struct ShearSpec {
    enum class Kind { X, Y };  // which base coordinate is sheared
    Kind kind = Kind::X;
    double amplitude = 0;
    int freq = 1;        // trig frequency in the transverse base coordinate
    double phase = 0;
    double s0 = 0.1, h = 0.5;  // bump support [s0, s0+h], must sit inside (0, min r)

    double bump(double s, int deriv) const;  // sin^6 bump, derivatives 0..3
};

struct PerturbationSpec {
    std::vector<ShearSpec> shears;
    double epsHat = 0;  // measured C^1 size, filled by FlowModel::finalize()
    bool empty() const { return shears.empty(); }
};

struct FlowModel {
    std::string name = "model";
    TorusAutomorphism base;
    RoofFunction roof;
    PerturbationSpec pert;

    // derived constants, filled by finalize()
    double roofMean = 0;     // = roof.constant (trig terms integrate to zero)
    double normDf = 0;       // measured sup ||Df||
    double normDfInv = 0;
    double flowHorizon = 64;

    void finalize();

    Vec3 wrap(Vec3 p) const;
    bool inFundamentalDomain(const Vec3& p, double tol = 1e-9) const;
    // distance on the suspension manifold, exact for nearby points
    double dist(const Vec3& p, const Vec3& q) const;

    // suspension flow g^t (unperturbed by construction)
    Vec3 flowPoint(const Vec3& p, double t) const;
    Jet3 flowJet(const Vec3& p, double t) const;

    // f = P ∘ g^1 and its inverse, with exact jets
    Vec3 timeOne(const Vec3& p) const;
    Jet3 timeOneJet(const Vec3& p, int order = 3) const;
    Vec3 inverseTimeOne(const Vec3& p) const;
    Jet3 inverseTimeOneJet(const Vec3& p, int order = 3) const;
    Vec3 iterate(Vec3 p, long n) const;  // f^n, n of either sign

    bool perturbed() const { return !pert.empty() && pert.epsHat > 0; }
};

// convenience constructors (the CLI builds models from config files instead)
FlowModel makeConstantRoofModel();
FlowModel makeVariableRoofModel(double amplitude = 0.10, double pertAmplitude = 0.0);

}  // namespace alab
