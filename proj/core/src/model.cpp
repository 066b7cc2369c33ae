#include "alab/model.hpp"

#include <algorithm>
#include <cmath>

namespace alab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap01(double v) {
    double w = v - std::floor(v);
    if (w >= 1.0) w -= 1.0;  // guard against -1e-17 -> 1.0
    return w;
}

// difference on the circle, in (-1/2, 1/2]
double circDiff(double a, double b) {
    double d = a - b;
    d -= std::round(d);
    return d;
}

}  // namespace

void TorusAutomorphism::finalize() {
    std::int64_t det = a * d - b * c;
    if (det != 1 && det != -1) throw UsageError("torus automorphism must have det ±1");
    double tr = double(a + d);
    if (std::abs(tr) <= 2.0) throw UsageError("torus automorphism must be hyperbolic (|trace| > 2)");
    double disc = std::sqrt(tr * tr - 4.0 * double(det));
    double l1 = (tr + disc) / 2.0;
    double l2 = (tr - disc) / 2.0;
    expandingEigenvalue = std::abs(l1) > std::abs(l2) ? l1 : l2;
    double contracting = std::abs(l1) > std::abs(l2) ? l2 : l1;
    auto eigvec = [&](double lam) {
        // (A - lam) v = 0
        Vec2 v;
        if (std::abs(double(b)) > 1e-12)
            v = Vec2{double(b), lam - double(a)};
        else if (std::abs(double(c)) > 1e-12)
            v = Vec2{lam - double(d), double(c)};
        else
            v = std::abs(double(a) - lam) < std::abs(double(d) - lam) ? Vec2{1, 0} : Vec2{0, 1};
        return v.normalized();
    };
    expandingDir = eigvec(expandingEigenvalue);
    contractingDir = eigvec(contracting);
}

double RoofFunction::value(const Vec2& q) const {
    double r = constant;
    for (const auto& t : terms) {
        double ph = kTwoPi * (t.m * q.x + t.n * q.y);
        r += t.cosAmp * std::cos(ph) + t.sinAmp * std::sin(ph);
    }
    return r;
}

Vec2 RoofFunction::grad(const Vec2& q) const {
    Vec2 g{0, 0};
    for (const auto& t : terms) {
        double ph = kTwoPi * (t.m * q.x + t.n * q.y);
        double d = kTwoPi * (-t.cosAmp * std::sin(ph) + t.sinAmp * std::cos(ph));
        g.x += d * t.m;
        g.y += d * t.n;
    }
    return g;
}

void RoofFunction::hess(const Vec2& q, double h[2][2]) const {
    h[0][0] = h[0][1] = h[1][0] = h[1][1] = 0;
    for (const auto& t : terms) {
        double ph = kTwoPi * (t.m * q.x + t.n * q.y);
        double d2 = kTwoPi * kTwoPi * (-t.cosAmp * std::cos(ph) - t.sinAmp * std::sin(ph));
        double f[2] = {double(t.m), double(t.n)};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) h[i][j] += d2 * f[i] * f[j];
    }
}

void RoofFunction::third(const Vec2& q, double t3[2][2][2]) const {
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) t3[i][j][k] = 0;
    for (const auto& t : terms) {
        double ph = kTwoPi * (t.m * q.x + t.n * q.y);
        double d3 = kTwoPi * kTwoPi * kTwoPi * (t.cosAmp * std::sin(ph) - t.sinAmp * std::cos(ph));
        double f[2] = {double(t.m), double(t.n)};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) t3[i][j][k] += d3 * f[i] * f[j] * f[k];
    }
}

void RoofFunction::finalize() {
    // certify positivity on a grid plus a coarse Lipschitz margin
    double lip = 0;
    for (const auto& t : terms)
        lip += kTwoPi * (std::abs(t.cosAmp) + std::abs(t.sinAmp)) * (std::abs(t.m) + std::abs(t.n));
    const int N = 256;
    double mn = 1e300;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            mn = std::min(mn, value({(i + 0.5) / N, (j + 0.5) / N}));
    minValue = mn - lip * 1.0 / N;
    if (minValue <= 0) throw UsageError("roof function is not certified positive");
}

double ShearSpec::bump(double s, int deriv) const {
    if (s <= s0 || s >= s0 + h) return 0;
    double u = M_PI * (s - s0) / h;
    double k = M_PI / h;
    // sin^6 u = (10 - 15 cos2u + 6 cos4u - cos6u)/32
    switch (deriv) {
        case 0: return (10 - 15 * std::cos(2 * u) + 6 * std::cos(4 * u) - std::cos(6 * u)) / 32;
        case 1: return k * (30 * std::sin(2 * u) - 24 * std::sin(4 * u) + 6 * std::sin(6 * u)) / 32;
        case 2: return k * k * (60 * std::cos(2 * u) - 96 * std::cos(4 * u) + 36 * std::cos(6 * u)) / 32;
        case 3: return k * k * k * (-120 * std::sin(2 * u) + 384 * std::sin(4 * u) - 216 * std::sin(6 * u)) / 32;
        default: throw UsageError("bump derivative order out of range");
    }
}

namespace {

// jet of one shear (or its inverse via sign) at p
Jet3 shearJet(const ShearSpec& sh, const Vec3& p, double sign) {
    Jet3 j = Jet3::identity(p);
    const int target = sh.kind == ShearSpec::Kind::X ? 0 : 1;
    const int trans = sh.kind == ShearSpec::Kind::X ? 1 : 0;  // transverse base coordinate
    double tv = trans == 0 ? p.x : p.y;
    double ph = kTwoPi * sh.freq * tv + sh.phase;
    double w = kTwoPi * sh.freq;
    double c0 = std::cos(ph), c1 = -w * std::sin(ph), c2 = -w * w * std::cos(ph),
           c3 = w * w * w * std::sin(ph);
    double b0 = sh.bump(p.z, 0), b1 = sh.bump(p.z, 1), b2 = sh.bump(p.z, 2), b3 = sh.bump(p.z, 3);
    double a = sign * sh.amplitude;

    j.value[target] += a * b0 * c0;
    j.J.m[target][trans] += a * b0 * c1;
    j.J.m[target][2] += a * b1 * c0;
    j.H[target][trans][trans] = a * b0 * c2;
    j.H[target][trans][2] = j.H[target][2][trans] = a * b1 * c1;
    j.H[target][2][2] = a * b2 * c0;
    j.T[target][trans][trans][trans] = a * b0 * c3;
    double tts = a * b1 * c2;
    j.T[target][trans][trans][2] = j.T[target][trans][2][trans] = j.T[target][2][trans][trans] = tts;
    double tss = a * b2 * c1;
    j.T[target][trans][2][2] = j.T[target][2][trans][2] = j.T[target][2][2][trans] = tss;
    j.T[target][2][2][2] = a * b3 * c0;
    return j;
}

}  // namespace

void FlowModel::finalize() {
    base.finalize();
    roof.finalize();
    roofMean = roof.constant;
    for (const auto& sh : pert.shears) {
        if (sh.s0 <= 0 || sh.s0 + sh.h >= roof.minValue)
            throw UsageError("shear bump support must sit inside (0, min roof)");
    }
    // measure ||Df||, ||Df^-1|| and the perturbation C^1 size on a fixed grid
    double nf = 0, nfi = 0, eps = 0;
    const int N = 9;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k) {
                Vec2 xy{(i + 0.35) / N, (j + 0.61) / N};
                double s = (k + 0.5) / N * roof.value(xy) * 0.999;
                Vec3 p{xy.x, xy.y, s};
                Jet3 f = timeOneJet(p);
                Jet3 fi = inverseTimeOneJet(p);
                nf = std::max(nf, f.J.opNorm());
                nfi = std::max(nfi, fi.J.opNorm());
                if (!pert.empty()) {
                    Jet3 g = flowJet(p, 1.0);
                    eps = std::max(eps, dist(f.value, g.value));
                    eps = std::max(eps, (f.J - g.J).opNorm());
                }
            }
    normDf = nf;
    normDfInv = nfi;
    pert.epsHat = eps;
}

Vec3 FlowModel::wrap(Vec3 p) const {
    p.x = wrap01(p.x);
    p.y = wrap01(p.y);
    int guard = 0;
    while (p.z < 0 && guard++ < 1000) {
        Vec2 pre = base.applyInverse({p.x, p.y});
        pre.x = wrap01(pre.x);
        pre.y = wrap01(pre.y);
        p.z += roof.value(pre);
        p.x = pre.x;
        p.y = pre.y;
    }
    while (p.z >= roof.value({p.x, p.y}) && guard++ < 1000) {
        p.z -= roof.value({p.x, p.y});
        Vec2 im = base.apply({p.x, p.y});
        p.x = wrap01(im.x);
        p.y = wrap01(im.y);
    }
    return p;
}

bool FlowModel::inFundamentalDomain(const Vec3& p, double tol) const {
    return p.x >= -tol && p.x < 1 + tol && p.y >= -tol && p.y < 1 + tol && p.z >= -tol &&
           p.z < roof.value({p.x, p.y}) + tol;
}

double FlowModel::dist(const Vec3& p, const Vec3& q) const {
    auto direct = [&](const Vec3& u, const Vec3& v) {
        double dx = circDiff(u.x, v.x), dy = circDiff(u.y, v.y), dz = u.z - v.z;
        return std::sqrt(dx * dx + dy * dy + dz * dz);
    };
    double best = direct(p, q);
    // p lifted through the roof, compared near the floor of the next chart
    {
        Vec2 im = base.apply({p.x, p.y});
        Vec3 lift{wrap01(im.x), wrap01(im.y), p.z - roof.value({p.x, p.y})};
        best = std::min(best, direct(lift, q));
    }
    {
        Vec2 im = base.apply({q.x, q.y});
        Vec3 lift{wrap01(im.x), wrap01(im.y), q.z - roof.value({q.x, q.y})};
        best = std::min(best, direct(p, lift));
    }
    return best;
}

Vec3 FlowModel::flowPoint(const Vec3& p, double t) const {
    return flowJet(p, t).value;
}

Jet3 FlowModel::flowJet(const Vec3& p, double t) const {
    if (!p.finite() || !std::isfinite(t)) throw UsageError("non-finite flow input");
    if (std::abs(t) > flowHorizon) throw UsageError("flow time beyond configured horizon");

    const double snap = 1e-13;
    Vec2 xy{p.x, p.y};
    double u = p.z + t;
    Mat2 M = Mat2::identity();  // accumulated d(current base)/d(original base)
    Vec2 gradS{0, 0};
    double hessS[2][2] = {{0, 0}, {0, 0}};
    double thirdS[2][2][2] = {};
    double sSign = 0;  // -1 accumulated subtraction (forward), +1 addition (backward)

    auto accumulate = [&](const Vec2& at, const Mat2& Mj, double sign) {
        Vec2 g = roof.grad(at);
        double h[2][2], t3[2][2][2];
        roof.hess(at, h);
        roof.third(at, t3);
        Vec2 gp = Mj.transpose() * g;
        gradS += sign * gp;
        for (int a2 = 0; a2 < 2; ++a2)
            for (int b2 = 0; b2 < 2; ++b2) {
                double s = 0;
                for (int c2 = 0; c2 < 2; ++c2)
                    for (int d2 = 0; d2 < 2; ++d2) s += h[c2][d2] * Mj.m[c2][a2] * Mj.m[d2][b2];
                hessS[a2][b2] += sign * s;
            }
        for (int a2 = 0; a2 < 2; ++a2)
            for (int b2 = 0; b2 < 2; ++b2)
                for (int c2 = 0; c2 < 2; ++c2) {
                    double s = 0;
                    for (int d2 = 0; d2 < 2; ++d2)
                        for (int e2 = 0; e2 < 2; ++e2)
                            for (int f2 = 0; f2 < 2; ++f2)
                                s += t3[d2][e2][f2] * Mj.m[d2][a2] * Mj.m[e2][b2] * Mj.m[f2][c2];
                    thirdS[a2][b2][c2] += sign * s;
                }
    };

    (void)sSign;
    int guard = 0;
    if (t >= 0) {
        while (u >= roof.value(xy) - snap) {
            accumulate(xy, M, -1.0);
            u -= roof.value(xy);
            if (u < 0) u = 0;  // snapped boundary crossing
            Vec2 im = base.apply(xy);
            xy = {wrap01(im.x), wrap01(im.y)};
            M = base.matrix() * M;
            if (++guard > 4000) throw NumericalInstabilityError("flow crossing scan diverged");
        }
    } else {
        while (u < 0) {
            Vec2 pre = base.applyInverse(xy);
            xy = {wrap01(pre.x), wrap01(pre.y)};
            M = base.matrix().inverse() * M;
            accumulate(xy, M, +1.0);
            u += roof.value(xy);
            if (++guard > 4000) throw NumericalInstabilityError("flow crossing scan diverged");
        }
    }

    Jet3 j;
    j.base = p;
    j.value = Vec3{xy.x, xy.y, u};
    for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 2; ++b2) j.J.m[a2][b2] = M.m[a2][b2];
    j.J.m[2][0] = gradS.x;
    j.J.m[2][1] = gradS.y;
    j.J.m[2][2] = 1.0;
    for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 2; ++b2) j.H[2][a2][b2] = hessS[a2][b2];
    for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 2; ++b2)
            for (int c2 = 0; c2 < 2; ++c2) j.T[2][a2][b2][c2] = thirdS[a2][b2][c2];
    return j;
}

Jet3 FlowModel::timeOneJet(const Vec3& p, int order) const {
    if (order < 0 || order > 3) throw UsageError("unsupported derivative order");
    Jet3 j = flowJet(p, 1.0);
    for (const auto& sh : pert.shears) {
        Jet3 s = shearJet(sh, j.value, +1.0);
        j = compose(s, j);
    }
    j.value = wrap(j.value);
    return j;
}

Vec3 FlowModel::timeOne(const Vec3& p) const { return timeOneJet(p, 0).value; }

Jet3 FlowModel::inverseTimeOneJet(const Vec3& p, int order) const {
    if (order < 0 || order > 3) throw UsageError("unsupported derivative order");
    Jet3 j = Jet3::identity(p);
    for (auto it = pert.shears.rbegin(); it != pert.shears.rend(); ++it) {
        Jet3 s = shearJet(*it, j.value, -1.0);
        j = compose(s, j);
    }
    Jet3 g = flowJet(j.value, -1.0);
    j = compose(g, j);
    j.value = wrap(j.value);
    return j;
}

Vec3 FlowModel::inverseTimeOne(const Vec3& p) const { return inverseTimeOneJet(p, 0).value; }

Vec3 FlowModel::iterate(Vec3 p, long n) const {
    for (long i = 0; i < std::labs(n); ++i) p = n > 0 ? timeOne(p) : inverseTimeOne(p);
    return p;
}

FlowModel makeConstantRoofModel() {
    FlowModel m;
    m.name = "cat_const";
    m.roof.constant = 1.0;
    m.finalize();
    return m;
}

FlowModel makeVariableRoofModel(double amplitude, double pertAmplitude) {
    FlowModel m;
    m.name = pertAmplitude > 0 ? "cat_var_pert" : "cat_var";
    m.roof.constant = 1.0;
    m.roof.terms.push_back({1, 0, amplitude, 0.0});
    m.roof.terms.push_back({1, 1, 0.0, 0.45 * amplitude});
    if (pertAmplitude > 0) {
        ShearSpec sx;
        sx.kind = ShearSpec::Kind::X;
        sx.amplitude = pertAmplitude;
        sx.freq = 1;
        sx.phase = 0.7;
        sx.s0 = 0.15;
        sx.h = 0.55;
        ShearSpec sy;
        sy.kind = ShearSpec::Kind::Y;
        sy.amplitude = 0.8 * pertAmplitude;
        sy.freq = 1;
        sy.phase = 2.1;
        sy.s0 = 0.2;
        sy.h = 0.5;
        m.pert.shears = {sx, sy};
    }
    m.finalize();
    return m;
}

}  // namespace alab
