#include "alab/bundles.hpp"

#include <algorithm>
#include <cmath>

namespace alab {

namespace {

Vec3 taylorOffset(const Jet3& j, const Vec3& d) {
    Vec3 r = j.J * d;
    for (int i = 0; i < 3; ++i) {
        double h = 0, t = 0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                h += j.H[i][a][b] * d[a] * d[b];
                for (int c = 0; c < 3; ++c) t += j.T[i][a][b][c] * d[a] * d[b] * d[c];
            }
        r[i] += 0.5 * h + t / 6.0;
    }
    return r;
}

}  // namespace

OrbitWorkspace::OrbitWorkspace(const FlowModel& m, const Vec3& p, int back, int fwd,
                               BundleParams par)
    : model_(&m), par_(par), back_(back), fwd_(fwd), pad_(par.coneDepth) {
    if (!p.finite()) throw UsageError("non-finite base point");
    const int lo = -back_ - pad_, hi = fwd_ + pad_;
    const int n = hi - lo + 1;
    pts_.resize(n);
    fjets_.resize(n);
    ijets_.resize(n);
    frames_.resize(back_ + fwd_ + 2 * pad_ + 1);
    nuS_.assign(n, 0);
    nuC_.assign(n, 0);
    nuU_.assign(n, 0);

    Vec3 q = m.wrap(p);
    pts_[idx(0)] = q;
    Vec3 cur = q;
    for (int k = 1; k <= hi; ++k) {
        cur = m.timeOne(cur);
        pts_[idx(k)] = cur;
    }
    cur = q;
    for (int k = -1; k >= lo; --k) {
        cur = m.inverseTimeOne(cur);
        pts_[idx(k)] = cur;
    }
    for (int k = lo; k <= hi; ++k) fjets_[idx(k)] = m.timeOneJet(pts_[idx(k)]);

    // forward sweep: unstable direction and the center-unstable plane normal
    Vec3 vu{m.base.expandingDir.x, m.base.expandingDir.y, 0};
    Vec3 ncu = Vec3{0, 0, 1}.cross(vu);  // annihilator seed of span(flow, unstable)
    const bool productCenter = !m.perturbed();
    std::vector<Vec3> eU(n), nCU(n);
    double ratioPrev = 1, ratio = 1;
    Vec3 prevDir = vu.normalized();
    for (int k = lo; k <= hi; ++k) {
        eU[idx(k)] = vu.normalized();
        nCU[idx(k)] = ncu.normalized();
        if (k < hi) {
            const Mat3& J = fjets_[idx(k)].J;
            Vec3 nv = J * vu.normalized();
            double upd = (nv.normalized() - eU[idx(k)]).norm();
            (void)upd;
            // angular update ratio bookkeeping (converged once ratio < tol)
            Vec3 nd = nv.normalized();
            double ang = (nd - (J * prevDir).normalized()).norm();
            ratioPrev = ratio;
            ratio = ang;
            prevDir = eU[idx(k)];
            vu = nv;
            ncu = leftMul(ncu, J.inverse());
        }
    }
    // backward sweep: stable direction and the center-stable plane normal
    Vec3 vs{m.base.contractingDir.x, m.base.contractingDir.y, 0};
    Vec3 ncs = Vec3{0, 0, 1}.cross(vs);
    std::vector<Vec3> eS(n), nCS(n);
    for (int k = hi; k >= lo; --k) {
        eS[idx(k)] = vs.normalized();
        nCS[idx(k)] = ncs.normalized();
        if (k > lo) {
            const Mat3& J = fjets_[idx(k - 1)].J;  // maps k-1 -> k
            Mat3 Jinv = J.inverse();
            vs = Jinv * vs;
            ncs = leftMul(ncs, J);
        }
    }
    // convergence certificate on the central window
    for (int k = -back_; k <= fwd_; ++k) {
        // measure the last cone-iteration update entering index k
        if (k - 1 >= lo) {
            Vec3 pushed = (fjets_[idx(k - 1)].J * eU[idx(k - 1)]).normalized();
            double upd = (pushed - eU[idx(k)]).norm();
            if (upd > 1e-3)
                throw CertificationError("unstable cone iteration failed to converge");
        }
    }

    for (int k = lo; k <= hi; ++k) {
        FrameField F;
        F.p = pts_[idx(k)];
        F.eU = eU[idx(k)];
        F.eS = eS[idx(k)];
        if (productCenter) {
            F.eC = Vec3{0, 0, 1};
        } else {
            Vec3 ec = nCU[idx(k)].cross(nCS[idx(k)]);
            if (ec.z < 0) ec = -ec;
            F.eC = ec.normalized();
        }
        Vec3 g = F.eS.cross(F.eU);
        double gn = g.dot(F.eC);
        if (std::abs(gn) < 1e-12)
            throw CertificationError("degenerate frame: dual center covector undefined");
        F.gammaC = g / gn;
        F.depth = pad_;
        frames_[idx(k)] = F;
    }
    for (int k = lo; k < hi; ++k) {
        const Mat3& J = fjets_[idx(k)].J;
        nuU_[idx(k)] = (J * frames_[idx(k)].eU).norm();
        nuS_[idx(k)] = (J * frames_[idx(k)].eS).norm();
        nuC_[idx(k)] = (J * frames_[idx(k)].eC).norm();
    }
}

const Jet3& OrbitWorkspace::fwdJet(int k) const { return fjets_[idx(k)]; }

const Jet3& OrbitWorkspace::invJet(int k) const {
    auto& slot = ijets_[idx(k)];
    if (!slot) slot = std::make_unique<Jet3>(model_->inverseTimeOneJet(pts_[idx(k)]));
    return *slot;
}

double OrbitWorkspace::nu(BundleKind b, int k) const {
    const auto& v = b == BundleKind::Stable ? nuS_ : (b == BundleKind::Center ? nuC_ : nuU_);
    return v[idx(k)];
}

double OrbitWorkspace::muLog(BundleKind b, int n) const {
    double s = 0;
    if (n >= 0)
        for (int k = 0; k < n; ++k) s += std::log(nu(b, k));
    else
        for (int k = n; k < 0; ++k) s -= std::log(nu(b, k));
    return s;
}

FrameField splittingAt(const FlowModel& m, const Vec3& p, int depth) {
    BundleParams par;
    par.coneDepth = depth;
    OrbitWorkspace ws(m, p, 0, 0, par);
    return ws.frame(0);
}

double cocycle(const FlowModel& m, const Vec3& p, long n, BundleKind b) {
    int back = int(std::max<long>(0, -n));
    int fwd = int(std::max<long>(0, n));
    OrbitWorkspace ws(m, p, back, fwd);
    return std::exp(ws.muLog(b, int(n)));
}

Vec3 leafCoordinate(OrbitWorkspace& ws, LeafKind kind, double tau) {
    const FlowModel& m = ws.model();
    const BundleParams& par = ws.params();
    if (tau == 0) return ws.point(0);
    if (std::abs(tau) > 4 * m.normDf + 1)
        throw UsageError("leaf parameter outside chart domain");

    const bool unstable = kind == LeafKind::Unstable;
    // choose depth so the seed offset is below seedScale
    int n = 1;
    {
        double acc = std::abs(tau);
        int cap = std::min(par.leafDepthCap, unstable ? ws.back() + par.coneDepth - 2
                                                      : ws.fwd() + par.coneDepth - 2);
        while (n < cap) {
            int k = unstable ? -n : n - 1;
            acc *= unstable ? 1.0 / ws.nu(BundleKind::Unstable, k)
                            : ws.nu(BundleKind::Stable, k);
            ++n;
            if (acc <= par.seedScale) break;
        }
    }
    int start = unstable ? -(n - 1) : (n - 1);
    double scale =
        std::exp(unstable ? ws.muLog(BundleKind::Unstable, start) : ws.muLog(BundleKind::Stable, start));
    Vec3 d = (unstable ? ws.frame(start).eU : ws.frame(start).eS) * (scale * tau);

    bool absolute = false;
    Vec3 q;
    for (int k = start; unstable ? k < 0 : k > 0; unstable ? ++k : --k) {
        if (!absolute && d.norm() > par.switchScale) {
            q = m.wrap(ws.point(k) + d);
            absolute = true;
        }
        if (absolute) {
            q = unstable ? m.timeOne(q) : m.inverseTimeOne(q);
        } else {
            d = unstable ? taylorOffset(ws.fwdJet(k), d) : taylorOffset(ws.invJet(k), d);
        }
        if (!d.finite()) throw NumericalInstabilityError("leaf tracking diverged");
    }
    Vec3 out = absolute ? q : m.wrap(ws.point(0) + d);
    if (!out.finite()) throw NumericalInstabilityError("leaf tracking diverged");
    return out;
}

Vec3 leafCoordinate(const FlowModel& m, const Vec3& p, LeafKind kind, double tau,
                    BundleParams par) {
    int depth = par.leafDepthCap;
    OrbitWorkspace ws(m, p, kind == LeafKind::Unstable ? depth : 0,
                      kind == LeafKind::Stable ? depth : 0, par);
    return leafCoordinate(ws, kind, tau);
}

double leafParameter(const FlowModel& m, const Vec3& base, LeafKind kind, const Vec3& q,
                     double tauGuess, BundleParams par) {
    int depth = par.leafDepthCap;
    OrbitWorkspace ws(m, base, kind == LeafKind::Unstable ? depth : 2,
                      kind == LeafKind::Stable ? depth : 2, par);
    double tau = tauGuess;
    double step = std::max(1e-5, 1e-6 * std::abs(tauGuess));
    for (int it = 0; it < 60; ++it) {
        Vec3 a = leafCoordinate(ws, kind, tau);
        double f0 = m.dist(a, q);
        if (f0 < 1e-12) break;
        Vec3 ap = leafCoordinate(ws, kind, tau + step);
        Vec3 am = leafCoordinate(ws, kind, tau - step);
        // project the residual on the leaf tangent direction
        Vec3 tdir = (ap - am);
        // use chart-difference via dist decomposition: fall back to secant on
        // the signed projection
        double dp = m.dist(ap, q), dm = m.dist(am, q);
        double deriv = (dp - dm) / (2 * step);
        if (std::abs(deriv) < 1e-14) break;
        double next = tau - f0 / deriv * (f0 > 0 ? 1.0 : 1.0);
        if (!std::isfinite(next)) break;
        if (std::abs(next - tau) < 1e-13 * std::max(1.0, std::abs(tau))) {
            tau = next;
            break;
        }
        tau = next;
        (void)tdir;
    }
    return tau;
}

LeafJets leafJetsAtZero(OrbitWorkspace& ws, LeafKind kind) {
    const bool unstable = kind == LeafKind::Unstable;
    const BundleParams& par = ws.params();
    int n = std::min(par.leafDepthCap,
                     (unstable ? ws.back() : ws.fwd()) + par.coneDepth - 2);
    int start = unstable ? -(n - 1) : (n - 1);
    double scale =
        std::exp(unstable ? ws.muLog(BundleKind::Unstable, start) : ws.muLog(BundleKind::Stable, start));
    Vec3 d1 = (unstable ? ws.frame(start).eU : ws.frame(start).eS) * scale;
    Vec3 d2{0, 0, 0}, d3{0, 0, 0};
    for (int k = start; unstable ? k < 0 : k > 0; unstable ? ++k : --k) {
        const Jet3& j = unstable ? ws.fwdJet(k) : ws.invJet(k);
        Vec3 nd1 = j.J * d1;
        Vec3 nd2 = j.J * d2;
        Vec3 nd3 = j.J * d3;
        for (int i = 0; i < 3; ++i) {
            nd2[i] += j.hess(i, d1, d1);
            nd3[i] += 3.0 * j.hess(i, d1, d2) + j.third(i, d1, d1, d1);
        }
        d1 = nd1;
        d2 = nd2;
        d3 = nd3;
    }
    return {d1, d2, d3};
}

}  // namespace alab
