#pragma once

// Partially hyperbolic splitting E^s ⊕ E^c ⊕ E^u, cocycles mu^*(p,n), the dual
// center covector field, and 1D non-stationary normal coordinates on leaves.

#include <memory>
#include <vector>

#include "alab/model.hpp"

namespace alab {

enum class BundleKind { Stable, Center, Unstable };
enum class LeafKind { Stable, Unstable };

struct FrameField {
    Vec3 p;
    Vec3 eS, eC, eU;  // unit tangent vectors
    Vec3 gammaC;      // dual center covector, normalized <gammaC, eC> = 1
    int depth = 0;
    double coneRatio = 0;    // last angular update ratio of the cone iteration
    double annihResid = 0;   // max(|<gammaC,eS>|, |<gammaC,eU>|) (zero by construction here)
};

struct BundleParams {
    int coneDepth = 40;
    double coneRatioTol = 0.9;  // certified geometric convergence of the cone iteration
    double seedScale = 1e-12;   // leaf tracking: seed offset size
    double switchScale = 1e-4;  // leaf tracking: Taylor -> direct switch
    int leafDepthCap = 60;
};

// Orbit segment of f through p with jets, frames and per-step stretches.
// Valid index range for points/frames is [-back, +fwd]; the constructor
// extends the orbit internally so the cone sweeps are converged on it.
class OrbitWorkspace {
public:
    OrbitWorkspace(const FlowModel& m, const Vec3& p, int back, int fwd,
                   BundleParams par = BundleParams{});

    const FlowModel& model() const { return *model_; }
    const BundleParams& params() const { return par_; }
    int back() const { return back_; }
    int fwd() const { return fwd_; }

    const Vec3& point(int k) const { return pts_[idx(k)]; }
    const Jet3& fwdJet(int k) const;  // jet of f at point k, defined for k in [-back-pad, fwd+pad-1]
    const Jet3& invJet(int k) const;  // jet of f^-1 at point k, defined for k in [-back-pad+1, fwd+pad]
    const FrameField& frame(int k) const { return frames_[idx(k)]; }

    double nu(BundleKind b, int k) const;     // per-step stretch at k
    double muLog(BundleKind b, int n) const;  // log mu^*(p, n)
    double mu(BundleKind b, int n) const { return std::exp(muLog(b, n)); }

private:
    int idx(int k) const { return k + back_ + pad_; }
    const FlowModel* model_;
    BundleParams par_;
    int back_ = 0, fwd_ = 0, pad_ = 0;
    std::vector<Vec3> pts_;
    std::vector<Jet3> fjets_;
    mutable std::vector<std::unique_ptr<Jet3>> ijets_;
    std::vector<FrameField> frames_;
    std::vector<double> nuS_, nuC_, nuU_;  // at index k..k+1 edges
};

FrameField splittingAt(const FlowModel& m, const Vec3& p, int depth = 40);
double cocycle(const FlowModel& m, const Vec3& p, long n, BundleKind b);

// leaf tracking: the point ι^{u,s}_p(tau); tau in [-4||Df||, 4||Df||]
Vec3 leafCoordinate(const FlowModel& m, const Vec3& p, LeafKind kind, double tau,
                    BundleParams par = BundleParams{});
Vec3 leafCoordinate(OrbitWorkspace& ws, LeafKind kind, double tau);

// local inverse of the leaf parametrization near tauGuess, for conjugacy tests
double leafParameter(const FlowModel& m, const Vec3& base, LeafKind kind, const Vec3& q,
                     double tauGuess, BundleParams par = BundleParams{});

// derivatives of tau -> ι(tau) at tau = 0 (normal-coordinate parametrization jets)
struct LeafJets {
    Vec3 d1, d2, d3;
};
LeafJets leafJetsAtZero(OrbitWorkspace& ws, LeafKind kind);

}  // namespace alab
