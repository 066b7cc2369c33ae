#pragma once

// Order-3 jets of maps R^3 -> R^3 with exact composition, inversion and
// Taylor evaluation. Derivative tensors are stored densely; symmetry in the
// lower indices is maintained by construction.

#include <array>
#include <stdexcept>

#include "alab/geom.hpp"

namespace alab {

struct Jet3 {
    Vec3 base;               // expansion point (domain)
    Vec3 value;              // F(base)
    Mat3 J;                  // J.m[i][a]     = d_a F_i
    double H[3][3][3] = {};  // H[i][a][b]    = d_a d_b F_i (sym in a,b)
    double T[3][3][3][3] = {};  // T[i][a][b][c] = d_a d_b d_c F_i (sym in a,b,c)

    static Jet3 identity(const Vec3& p) {
        Jet3 j;
        j.base = p;
        j.value = p;
        j.J = Mat3::identity();
        return j;
    }

    // translation by t in the z (flow) coordinate
    static Jet3 translation(const Vec3& p, const Vec3& shift) {
        Jet3 j = identity(p);
        j.value = p + shift;
        return j;
    }

    Vec3 applyTangent(const Vec3& v) const { return J * v; }

    // Taylor evaluation of the map at base + d
    Vec3 taylor(const Vec3& d) const {
        Vec3 r = value + J * d;
        for (int i = 0; i < 3; ++i) {
            double h = 0, t = 0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    h += H[i][a][b] * d[a] * d[b];
                    for (int c = 0; c < 3; ++c) t += T[i][a][b][c] * d[a] * d[b] * d[c];
                }
            r[i] += 0.5 * h + t / 6.0;
        }
        return r;
    }

    // Taylor evaluation of the derivative at base + d
    Mat3 taylorDerivative(const Vec3& d) const {
        Mat3 r = J;
        for (int i = 0; i < 3; ++i)
            for (int a = 0; a < 3; ++a) {
                double h = 0, t = 0;
                for (int b = 0; b < 3; ++b) {
                    h += H[i][a][b] * d[b];
                    for (int c = 0; c < 3; ++c) t += T[i][a][b][c] * d[b] * d[c];
                }
                r.m[i][a] += h + 0.5 * t;
            }
        return r;
    }

    // second derivative (as tensor contracted against nothing) at base + d
    void taylorHessian(const Vec3& d, double out[3][3][3]) const {
        for (int i = 0; i < 3; ++i)
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    double t = 0;
                    for (int c = 0; c < 3; ++c) t += T[i][a][b][c] * d[c];
                    out[i][a][b] = H[i][a][b] + t;
                }
    }

    Vec3 hessianApply(int i, const Vec3& u, const Vec3& v) const = delete;

    double hess(int i, const Vec3& u, const Vec3& v) const {
        double s = 0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) s += H[i][a][b] * u[a] * v[b];
        return s;
    }
    double third(int i, const Vec3& u, const Vec3& v, const Vec3& w) const {
        double s = 0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int c = 0; c < 3; ++c) s += T[i][a][b][c] * u[a] * v[b] * w[c];
        return s;
    }
};

// jet of g∘f where g is expanded at f.value (caller must guarantee alignment;
// a mismatch would silently produce the jet of the wrong composition)
inline Jet3 compose(const Jet3& g, const Jet3& f) {
    Jet3 r;
    r.base = f.base;
    r.value = g.value;
    r.J = g.J * f.J;
    for (int i = 0; i < 3; ++i) {
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) {
                double s = 0;
                for (int c = 0; c < 3; ++c) {
                    for (int d = 0; d < 3; ++d) s += g.H[i][c][d] * f.J.m[c][a] * f.J.m[d][b];
                    s += g.J.m[i][c] * f.H[c][a][b];
                }
                r.H[i][a][b] = r.H[i][b][a] = s;
            }
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b)
                for (int c = b; c < 3; ++c) {
                    double s = 0;
                    for (int d = 0; d < 3; ++d) {
                        for (int e = 0; e < 3; ++e) {
                            for (int f2 = 0; f2 < 3; ++f2)
                                s += g.T[i][d][e][f2] * f.J.m[d][a] * f.J.m[e][b] * f.J.m[f2][c];
                            s += g.H[i][d][e] * (f.H[d][a][b] * f.J.m[e][c] +
                                                 f.H[d][a][c] * f.J.m[e][b] +
                                                 f.H[d][b][c] * f.J.m[e][a]);
                        }
                        s += g.J.m[i][d] * f.T[d][a][b][c];
                    }
                    r.T[i][a][b][c] = r.T[i][a][c][b] = r.T[i][b][a][c] = s;
                    r.T[i][b][c][a] = r.T[i][c][a][b] = r.T[i][c][b][a] = s;
                }
    }
    return r;
}

// jet of the inverse map, expanded at f.value
inline Jet3 inverseJet(const Jet3& f) {
    Jet3 r;
    r.base = f.value;
    r.value = f.base;
    Mat3 K = f.J.inverse();
    r.J = K;
    // G'' = -K F''(K.,K.)
    for (int i = 0; i < 3; ++i)
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) {
                double s = 0;
                for (int c = 0; c < 3; ++c) {
                    double inner = 0;
                    for (int d = 0; d < 3; ++d)
                        for (int e = 0; e < 3; ++e)
                            inner += f.H[c][d][e] * K.m[d][a] * K.m[e][b];
                    s += K.m[i][c] * inner;
                }
                r.H[i][a][b] = r.H[i][b][a] = -s;
            }
    // G''' = -K[ F'''(K,K,K) + sym3 F''(G''(.,.), K.) ]
    for (int i = 0; i < 3; ++i)
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b)
                for (int c = b; c < 3; ++c) {
                    double s = 0;
                    for (int p = 0; p < 3; ++p) {
                        double inner = 0;
                        for (int d = 0; d < 3; ++d)
                            for (int e = 0; e < 3; ++e) {
                                for (int f2 = 0; f2 < 3; ++f2)
                                    inner += f.T[p][d][e][f2] * K.m[d][a] * K.m[e][b] * K.m[f2][c];
                                inner += f.H[p][d][e] * (r.H[d][a][b] * K.m[e][c] +
                                                         r.H[d][a][c] * K.m[e][b] +
                                                         r.H[d][b][c] * K.m[e][a]);
                            }
                        s += K.m[i][p] * inner;
                    }
                    r.T[i][a][b][c] = r.T[i][a][c][b] = r.T[i][b][a][c] = -s;
                    r.T[i][b][c][a] = r.T[i][c][a][b] = r.T[i][c][b][a] = -s;
                }
    return r;
}

}  // namespace alab
