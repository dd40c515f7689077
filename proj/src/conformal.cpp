#include "csem/conformal.hpp"

#include <algorithm>
#include <cmath>

namespace csem {

// ============================================================================
// PAC calibration
// ============================================================================

namespace {

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

} // namespace

double binomial_cdf(int64_t n, int64_t k, double p) {
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    if (p <= 0.0) return 1.0;
    if (p >= 1.0) return 0.0;
    // log term_i, via the recurrence term_{i+1}/term_i = (n-i)/(i+1) * p/(1-p)
    double log_ratio = std::log(p) - std::log1p(-p);
    double log_term = static_cast<double>(n) * std::log1p(-p);
    double log_sum = log_term;
    for (int64_t i = 0; i < k; ++i) {
        log_term += std::log(static_cast<double>(n - i)) -
                    std::log(static_cast<double>(i + 1)) + log_ratio;
        log_sum = log_add(log_sum, log_term);
    }
    return std::exp(std::min(log_sum, 0.0));
}

ConformalPredictor pac_calibrate(std::vector<double> scores, double eps, double delta) {
    if (scores.empty()) fail(ErrorKind::Config, "pac_calibrate: empty score list");
    if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::Config, "pac_calibrate: eps out of (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) fail(ErrorKind::Config, "pac_calibrate: delta out of (0,1)");

    const int64_t n = static_cast<int64_t>(scores.size());
    ConformalPredictor out;
    out.epsilon = eps;
    out.delta = delta;
    out.n_cal = n;

    // Scan upward; the CDF is nondecreasing in k, so the first k over delta
    // ends the search. CDF(n) = 1 > delta, hence k_allowed <= n - 1.
    int64_t k_allowed = -1;
    double log_ratio = std::log(eps) - std::log1p(-eps);
    double log_term = static_cast<double>(n) * std::log1p(-eps);
    double log_sum = log_term;
    for (int64_t k = 0; k < n; ++k) {
        if (std::exp(std::min(log_sum, 0.0)) <= delta) {
            k_allowed = k;
        } else {
            break;
        }
        log_term += std::log(static_cast<double>(n - k)) -
                    std::log(static_cast<double>(k + 1)) + log_ratio;
        log_sum = log_add(log_sum, log_term);
    }
    out.k_allowed = k_allowed;
    if (k_allowed < 0) return out; // tau stays -inf: full set

    std::stable_sort(scores.begin(), scores.end());
    out.tau = scores[static_cast<size_t>(k_allowed)];
    return out;
}

// ============================================================================
// Epsilon budget
// ============================================================================

EpsilonBudget allocate_epsilon(int n_ml_sites, double eps, double delta,
                               const SplitPolicy& policy) {
    if (!(eps > 0.0)) fail(ErrorKind::Config, "allocate_epsilon: eps must be positive");
    if (!(delta > 0.0)) fail(ErrorKind::Config, "allocate_epsilon: delta must be positive");

    EpsilonBudget b;
    b.total = eps;
    b.delta_total = delta;
    const int k = n_ml_sites;

    switch (policy.kind) {
    case SplitPolicy::Kind::Even: {
        double share = eps / static_cast<double>(1 + k);
        b.direct_pool = share;
        b.ml_eps.assign(static_cast<size_t>(k), share);
        break;
    }
    case SplitPolicy::Kind::SingleSplit: {
        if (policy.eps0 < 0.0 || policy.eps1 < 0.0 || policy.eps0 + policy.eps1 > eps + 1e-12) {
            fail(ErrorKind::Config, "allocate_epsilon: single split exceeds the budget");
        }
        b.direct_pool = policy.eps0;
        double per_site = k > 0 ? policy.eps1 / static_cast<double>(k) : 0.0;
        b.ml_eps.assign(static_cast<size_t>(k), per_site);
        break;
    }
    case SplitPolicy::Kind::Weighted: {
        if (static_cast<int>(policy.weights.size()) != k + 1) {
            fail(ErrorKind::Config, "allocate_epsilon: weighted policy needs 1 + k entries");
        }
        double sum = 0.0;
        for (double w : policy.weights) {
            if (w < 0.0) fail(ErrorKind::Config, "allocate_epsilon: negative weight");
            sum += w;
        }
        if (sum > eps + 1e-12) {
            fail(ErrorKind::Config, "allocate_epsilon: weights exceed the union-bound budget");
        }
        b.direct_pool = policy.weights[0];
        b.ml_eps.assign(policy.weights.begin() + 1, policy.weights.end());
        break;
    }
    }

    b.direct_delta = delta * (b.direct_pool / eps);
    b.ml_delta.resize(b.ml_eps.size());
    for (size_t i = 0; i < b.ml_eps.size(); ++i) b.ml_delta[i] = delta * (b.ml_eps[i] / eps);
    return b;
}

// ============================================================================
// Direct predictors
// ============================================================================

AbstractValue DirectPredictor::emit(const Value& std_value, AbstractMode mode) const {
    switch (kind) {
    case Kind::Deterministic:
        return abstract_of_value(std_value, mode);
    case Kind::IntRadius: {
        int64_t c = std_value.as_int();
        int64_t r = full ? kFullSetRadius : radius;
        if (mode == AbstractMode::Interval) {
            return AbstractValue(Interval(checked_sub(c, r), checked_add(c, r)));
        }
        if (r > (int64_t{1} << 20)) {
            fail(ErrorKind::EnumerationOverflow, "set-mode direct predictor too wide");
        }
        std::vector<int64_t> vals;
        vals.reserve(static_cast<size_t>(2 * r + 1));
        for (int64_t y = c - r; y <= c + r; ++y) vals.push_back(y);
        return AbstractValue(IntSet(std::move(vals)));
    }
    case Kind::DiscreteBool:
        if (full || !exact) return AbstractValue(Kleene::Top);
        return AbstractValue(kleene_of(std_value.as_bool()));
    case Kind::DiscreteCat:
        if (full || !exact) return AbstractValue(CatSet::full(n_cats));
        return AbstractValue(CatSet::single(std_value.as_cat()));
    case Kind::Product: {
        const auto& elems = std_value.as_tuple().elems;
        TupleA t;
        t.elems.reserve(components.size());
        for (size_t i = 0; i < components.size(); ++i) {
            t.elems.push_back(components[i].emit(elems.at(i), mode));
        }
        return AbstractValue(std::move(t));
    }
    }
    fail(ErrorKind::Type, "bad direct predictor");
}

double direct_score(const PrimType& range, const Value& std_value, const Value& y,
                    int n_cats) {
    switch (range.kind) {
    case TypeKind::Int:
        return -std::abs(static_cast<double>(y.as_int()) -
                         static_cast<double>(std_value.as_int()));
    case TypeKind::Bool:
        return y.as_bool() == std_value.as_bool() ? 1.0 : 0.0;
    case TypeKind::Cat:
        if (y.as_cat().id < 0 || y.as_cat().id >= n_cats) return -1.0;
        return y.as_cat() == std_value.as_cat() ? 1.0 : 0.0;
    default:
        fail(ErrorKind::UnsupportedRange, "no scalar conformity score for this range");
    }
}

namespace {

bool range_classifiable(const PrimType& t) {
    switch (t.kind) {
    case TypeKind::Int:
    case TypeKind::Bool:
    case TypeKind::Cat:
        return true;
    case TypeKind::Tuple:
        return std::all_of(t.args.begin(), t.args.end(), range_classifiable);
    case TypeKind::List:
        return false;
    }
    return false;
}

} // namespace

// ============================================================================
// Pipeline
// ============================================================================

ConformalPipeline::ConformalPipeline(const Program& p, const TypeInfo& info, OracleMap oracles,
                                     AbstractMode mode, int n_cats)
    : prog_(p), info_(info), oracles_(std::move(oracles)), mode_(mode), n_cats_(n_cats) {
    eligible_.assign(static_cast<size_t>(p.n_nodes), 0);
    want_.assign(static_cast<size_t>(p.n_nodes), 0);

    // Direct calibration applies at program points whose range is integer,
    // discrete, or a product thereof, and whose value actually depends on an
    // ML component; deterministic points are exact already and consume no
    // budget. List-valued points get compositional treatment only.
    std::vector<const Expr*> stack{p.root.get()};
    while (!stack.empty()) {
        const Expr* e = stack.back();
        stack.pop_back();
        const NodeInfo& ni = info_.nodes[static_cast<size_t>(e->id)];
        if (e->node == Expr::Node::Apply && !is_ml_component(e->comp) && ni.has_ml &&
            range_classifiable(ni.type)) {
            eligible_[static_cast<size_t>(e->id)] = 1;
            want_[static_cast<size_t>(e->id)] = 1;
        }
        for (const auto& a : e->args) stack.push_back(a.get());
    }
    root_is_ml_ = p.root->node == Expr::Node::Apply && is_ml_component(p.root->comp);
    want_[static_cast<size_t>(p.root->id)] = 1;
}

DirectPredictor ConformalPipeline::calibrate_node(const std::vector<Value>& std_vals,
                                                  const std::vector<Value>& gt_vals,
                                                  const PrimType& type, double eps,
                                                  double delta) const {
    DirectPredictor dp;
    switch (type.kind) {
    case TypeKind::Int: {
        dp.kind = DirectPredictor::Kind::IntRadius;
        std::vector<double> scores(std_vals.size());
        for (size_t i = 0; i < std_vals.size(); ++i) {
            scores[i] = direct_score(type, std_vals[i], gt_vals[i]);
        }
        ConformalPredictor cp = pac_calibrate(std::move(scores), eps, delta);
        if (cp.full_set()) {
            dp.full = true;
        } else {
            dp.radius = std::max<int64_t>(0, static_cast<int64_t>(std::ceil(-cp.tau)));
        }
        return dp;
    }
    case TypeKind::Bool:
    case TypeKind::Cat: {
        dp.kind = type.kind == TypeKind::Bool ? DirectPredictor::Kind::DiscreteBool
                                              : DirectPredictor::Kind::DiscreteCat;
        dp.n_cats = n_cats_;
        std::vector<double> scores(std_vals.size());
        for (size_t i = 0; i < std_vals.size(); ++i) {
            scores[i] = direct_score(type, std_vals[i], gt_vals[i]);
        }
        ConformalPredictor cp = pac_calibrate(std::move(scores), eps, delta);
        if (cp.full_set()) {
            dp.full = true;
        } else {
            dp.exact = cp.tau > 0.0;
        }
        return dp;
    }
    case TypeKind::Tuple: {
        dp.kind = DirectPredictor::Kind::Product;
        const size_t arity = type.args.size();
        double comp_eps = eps / static_cast<double>(arity);
        double comp_delta = delta / static_cast<double>(arity);
        for (size_t c = 0; c < arity; ++c) {
            std::vector<Value> sc(std_vals.size()), gc(gt_vals.size());
            for (size_t i = 0; i < std_vals.size(); ++i) {
                sc[i] = std_vals[i].as_tuple().elems.at(c);
                gc[i] = gt_vals[i].as_tuple().elems.at(c);
            }
            dp.components.push_back(calibrate_node(sc, gc, type.args[c], comp_eps, comp_delta));
        }
        return dp;
    }
    case TypeKind::List:
        fail(ErrorKind::UnsupportedRange, "direct calibration is undefined for list ranges");
    }
    fail(ErrorKind::UnsupportedRange, "unclassifiable range");
}

void ConformalPipeline::calibrate(const std::vector<ProgInput>& cal, double eps, double delta,
                                  const SplitPolicy& policy) {
    if (cal.empty()) fail(ErrorKind::Config, "empty calibration set");
    const int k = static_cast<int>(info_.ml_sites.size());
    budget_ = allocate_epsilon(k, eps, delta, policy);
    calib_warnings_ = 0;

    // One standard and one ground-truth pass per calibration example, with
    // per-node traces at the direct-eligible points.
    const size_t n = cal.size();
    std::vector<std::vector<std::optional<Value>>> std_trace(n), gt_trace(n);
    std::vector<ExampleRef> refs;
    refs.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        std_trace[i].resize(static_cast<size_t>(prog_.n_nodes));
        gt_trace[i].resize(static_cast<size_t>(prog_.n_nodes));
        NodeRecorder rec_std{&want_, &std_trace[i]};
        NodeRecorder rec_gt{&want_, &gt_trace[i]};
        eval_standard(prog_, cal[i], oracles_, &rec_std);
        eval_ground_truth(prog_, cal[i], oracles_, &rec_gt);
        refs.push_back(cal[i].ref);
    }

    // ML site predictors for the full budget and for the compositional-only
    // split (eps / k per site).
    site_full_.clear();
    site_comp_.clear();
    for (int s = 0; s < k; ++s) {
        const MLOracle& o = *oracles_.at(info_.ml_sites[static_cast<size_t>(s)]->comp);
        site_full_.push_back(
            o.calibrate(refs, budget_.ml_eps[static_cast<size_t>(s)],
                        budget_.ml_delta[static_cast<size_t>(s)], mode_));
        site_comp_.push_back(o.calibrate(refs, eps / static_cast<double>(k),
                                         delta / static_cast<double>(k), mode_));
    }

    // Per-node direct predictors share the direct pool equally.
    node_direct_.clear();
    std::vector<int> direct_ids;
    for (int id = 0; id < prog_.n_nodes; ++id) {
        if (eligible_[static_cast<size_t>(id)]) direct_ids.push_back(id);
    }
    auto collect = [&](int id, std::vector<Value>& sv, std::vector<Value>& gv) {
        sv.resize(n);
        gv.resize(n);
        for (size_t i = 0; i < n; ++i) {
            sv[i] = *std_trace[i][static_cast<size_t>(id)];
            gv[i] = *gt_trace[i][static_cast<size_t>(id)];
        }
    };
    if (!direct_ids.empty() && budget_.direct_pool > 0.0 && n > 0) {
        double node_eps = budget_.direct_pool / static_cast<double>(direct_ids.size());
        double node_delta = budget_.direct_delta / static_cast<double>(direct_ids.size());
        for (int id : direct_ids) {
            std::vector<Value> sv, gv;
            collect(id, sv, gv);
            NodeDirect nd;
            nd.node_id = id;
            nd.pred = calibrate_node(sv, gv, info_.nodes[static_cast<size_t>(id)].type, node_eps,
                                     node_delta);
            node_direct_.push_back(std::move(nd));
        }
    }

    // Standalone direct predictor at the root, with the whole budget.
    const int root_id = prog_.root->id;
    root_site_direct_.reset();
    if (root_is_ml_) {
        const MLOracle& o = *oracles_.at(prog_.root->comp);
        root_site_direct_ = o.calibrate(refs, eps, delta, mode_);
    } else if (!info_.nodes[static_cast<size_t>(root_id)].has_ml) {
        root_direct_ = DirectPredictor{}; // deterministic program: exact
    } else if (n > 0) {
        if (!range_classifiable(info_.root_type)) {
            fail(ErrorKind::UnsupportedRange,
                 "direct semantics needs an integer, discrete, or product range at the root");
        }
        std::vector<Value> sv, gv;
        collect(root_id, sv, gv);
        root_direct_ = calibrate_node(sv, gv, info_.root_type, eps, delta);
    }
}

AbstractValue ConformalPipeline::eval_direct(const ProgInput& x) const {
    if (root_is_ml_) return root_site_direct_->abstract_output(x.ref);
    Value std_val = eval_standard(prog_, x, oracles_);
    return root_direct_.emit(std_val, mode_);
}

AbstractValue ConformalPipeline::run_full(const ProgInput& x,
                                          const std::vector<std::optional<Value>>& std_vals,
                                          int* empty_meets, int* warnings) const {
    std::vector<AbstractValue> outs;
    outs.reserve(site_full_.size());
    for (const auto& sp : site_full_) outs.push_back(sp->abstract_output(x.ref, warnings));

    // Meet the compositional value with the direct prediction at every
    // calibrated point. An empty meet is a diagnosed miscoverage event, not a
    // failure: the direct value stands.
    std::vector<const DirectPredictor*> by_node(static_cast<size_t>(prog_.n_nodes), nullptr);
    for (const auto& nd : node_direct_) {
        by_node[static_cast<size_t>(nd.node_id)] = &nd.pred;
    }
    MeetHook hook = [&](const Expr& e, AbstractValue v) -> AbstractValue {
        const DirectPredictor* dp = by_node[static_cast<size_t>(e.id)];
        if (!dp) return v;
        AbstractValue dv = dp->emit(*std_vals[static_cast<size_t>(e.id)], mode_);
        auto m = meet(v, dv);
        if (!m) {
            if (empty_meets) ++*empty_meets;
            return dv;
        }
        return std::move(*m);
    };
    return eval_abstract(prog_, info_, x, outs, mode_, &hook);
}

AbstractValue ConformalPipeline::eval_compositional_only(const ProgInput& x) const {
    std::vector<const CalibratedML*> comp;
    comp.reserve(site_comp_.size());
    for (const auto& sp : site_comp_) comp.push_back(sp.get());
    return eval_compositional(prog_, info_, x, comp, mode_);
}

AbstractValue ConformalPipeline::eval_compositional_full_budget(const ProgInput& x) const {
    std::vector<const CalibratedML*> sites;
    sites.reserve(site_full_.size());
    for (const auto& sp : site_full_) sites.push_back(sp.get());
    return eval_compositional(prog_, info_, x, sites, mode_);
}

std::optional<AbstractValue> ConformalPipeline::root_direct_share(const Value& std_value) const {
    for (const auto& nd : node_direct_) {
        if (nd.node_id == prog_.root->id) return nd.pred.emit(std_value, mode_);
    }
    return std::nullopt;
}

AbstractValue ConformalPipeline::eval_full(const ProgInput& x, int* empty_meets) const {
    std::vector<std::optional<Value>> std_vals(static_cast<size_t>(prog_.n_nodes));
    NodeRecorder rec{&want_, &std_vals};
    eval_standard(prog_, x, oracles_, &rec);
    return run_full(x, std_vals, empty_meets, nullptr);
}

ConformalPipeline::Outputs ConformalPipeline::evaluate(const ProgInput& x) const {
    Outputs out;
    std::vector<std::optional<Value>> std_vals(static_cast<size_t>(prog_.n_nodes));
    NodeRecorder rec{&want_, &std_vals};
    out.standard = eval_standard(prog_, x, oracles_, &rec);
    out.ground_truth = eval_ground_truth(prog_, x, oracles_);

    if (root_is_ml_) {
        out.direct = root_site_direct_->abstract_output(x.ref, &out.warnings);
    } else {
        out.direct = root_direct_.emit(out.standard, mode_);
    }

    std::vector<const CalibratedML*> comp;
    comp.reserve(site_comp_.size());
    for (const auto& sp : site_comp_) comp.push_back(sp.get());
    out.compositional = eval_compositional(prog_, info_, x, comp, mode_);

    out.full = run_full(x, std_vals, &out.empty_meets, &out.warnings);
    return out;
}

} // namespace csem
