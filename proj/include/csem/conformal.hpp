#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "csem/eval.hpp"

namespace csem {

// ============================================================================
// PAC calibration
// ============================================================================

// A calibrated threshold: the prediction set is the tau level set of the
// scoring function, {y | g(x,y) >= tau}. k_allowed = -1 means no error count
// satisfied the tail bound and the predictor must return the full set.
struct ConformalPredictor {
    double tau = -std::numeric_limits<double>::infinity();
    int64_t k_allowed = -1;
    double epsilon = 0.0;
    double delta = 0.0;
    int64_t n_cal = 0;

    bool full_set() const { return k_allowed < 0; }
};

// P[Bin(n, p) <= k], computed in log space.
double binomial_cdf(int64_t n, int64_t k, double p);

// Binomial tail inversion: k_allowed = max{ k : P[Bin(n, eps) <= k] <= delta },
// tau = the (k_allowed + 1)-th smallest score. Scores strictly below tau count
// as calibration errors; ties with tau are covered.
ConformalPredictor pac_calibrate(std::vector<double> scores, double eps, double delta);

// ============================================================================
// Epsilon budget
// ============================================================================

struct SplitPolicy {
    enum class Kind { Even, SingleSplit, Weighted };
    Kind kind = Kind::Even;
    // SingleSplit: eps0 to the direct pool, eps1 shared by the ML sites.
    double eps0 = 0.0;
    double eps1 = 0.0;
    // Weighted: absolute epsilon values, [direct, site_1, ..., site_k].
    std::vector<double> weights;

    static SplitPolicy even() { return {}; }
    static SplitPolicy single_split(double e0, double e1) {
        return {Kind::SingleSplit, e0, e1, {}};
    }
    static SplitPolicy weighted(std::vector<double> w) {
        return {Kind::Weighted, 0.0, 0.0, std::move(w)};
    }
};

// Allocation of the global error bound across the direct predictors and each
// ML site, satisfying eps >= direct_pool + sum(ml_eps). The delta budget is
// split in the same proportions.
struct EpsilonBudget {
    double total = 0.0;
    double delta_total = 0.0;
    double direct_pool = 0.0;
    double direct_delta = 0.0;
    std::vector<double> ml_eps;
    std::vector<double> ml_delta;
};

EpsilonBudget allocate_epsilon(int n_ml_sites, double eps, double delta,
                               const SplitPolicy& policy);

// Conformity score of a candidate output at a non-ML program point. Integer
// ranges score by distance from the standard value; discrete ranges give the
// standard value 1, other in-range values 0, and impossible values -1.
// Tuple ranges are scored componentwise by their own predictors, not here.
double direct_score(const PrimType& range, const Value& std_value, const Value& y,
                    int n_cats = 64);

// ============================================================================
// Direct predictors at program points
// ============================================================================

// Emits the abstract prediction set around a program point's standard value.
// Integer ranges use a symmetric radius; discrete ranges are all-or-nothing;
// tuple ranges apply componentwise predictors.
struct DirectPredictor {
    enum class Kind { Deterministic, IntRadius, DiscreteBool, DiscreteCat, Product };
    Kind kind = Kind::Deterministic;
    bool full = false;     // tau = -inf
    int64_t radius = 0;    // IntRadius
    bool exact = false;    // Discrete: prediction is alpha(std) rather than Top
    int n_cats = 0;        // DiscreteCat full set size
    std::vector<DirectPredictor> components;

    AbstractValue emit(const Value& std_value, AbstractMode mode) const;
};

// Radius used when an integer-ranged predictor degenerates to the full set.
constexpr int64_t kFullSetRadius = int64_t{1} << 40;

// ============================================================================
// Conformal evaluation pipeline for one program
// ============================================================================

// Owns every calibrated predictor needed to evaluate the direct,
// compositional, and full conformal semantics of a single program. Thresholds
// are calibrated once per calibration set and reused across test inputs;
// evaluation afterwards is pure.
class ConformalPipeline {
public:
    ConformalPipeline(const Program& p, const TypeInfo& info, OracleMap oracles,
                      AbstractMode mode, int n_cats = 64);

    void calibrate(const std::vector<ProgInput>& cal, double eps, double delta,
                   const SplitPolicy& policy);

    struct Outputs {
        Value ground_truth;
        Value standard;
        AbstractValue direct;
        AbstractValue compositional;
        AbstractValue full;
        int empty_meets = 0;
        int warnings = 0;
    };
    Outputs evaluate(const ProgInput& x) const;

    // Individual semantics, for callers that need only one of them.
    AbstractValue eval_direct(const ProgInput& x) const;
    AbstractValue eval_compositional_only(const ProgInput& x) const;
    AbstractValue eval_full(const ProgInput& x, int* empty_meets = nullptr) const;

    // The operands of the root meet inside eval_full: the compositional value
    // propagated from the full-budget site predictors, and the root's
    // eps0-share direct prediction (absent when the root point is not
    // calibrated).
    AbstractValue eval_compositional_full_budget(const ProgInput& x) const;
    std::optional<AbstractValue> root_direct_share(const Value& std_value) const;

    const EpsilonBudget& budget() const { return budget_; }
    int calibration_warnings() const { return calib_warnings_; }

private:
    struct NodeDirect {
        int node_id = -1;
        DirectPredictor pred;
    };

    DirectPredictor calibrate_node(const std::vector<Value>& std_vals,
                                   const std::vector<Value>& gt_vals, const PrimType& type,
                                   double eps, double delta) const;

    AbstractValue run_full(const ProgInput& x, const std::vector<std::optional<Value>>& std_vals,
                           int* empty_meets, int* warnings) const;

    const Program& prog_;
    const TypeInfo& info_;
    OracleMap oracles_;
    AbstractMode mode_;
    int n_cats_ = 64;

    std::vector<char> eligible_;          // by node id: direct-eligible
    std::vector<char> want_;              // nodes to record in the standard pass
    EpsilonBudget budget_;

    std::vector<std::unique_ptr<CalibratedML>> site_full_;
    std::vector<std::unique_ptr<CalibratedML>> site_comp_;
    std::vector<NodeDirect> node_direct_;   // per eligible node, at its eps0 share
    DirectPredictor root_direct_;           // standalone, at the whole eps
    bool root_is_ml_ = false;
    std::unique_ptr<CalibratedML> root_site_direct_; // when the root is an ML site
    int calib_warnings_ = 0;
};

} // namespace csem
