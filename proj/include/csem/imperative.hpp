#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "csem/conformal.hpp"
#include "csem/models.hpp"

namespace csem {

// ============================================================================
// While-language AST
// ============================================================================

enum class ImpOp {
    Const, Add, Sub, Mul, Min, Max,
    Le, Lt, Ge, Gt, Eq,
    And, Or, Not,
    Len,    // length of the input list
    MlRead, // predicted digit at an index of the input list
};

struct ImpOperand {
    bool literal = false;
    int64_t lit = 0;
    int var = -1;
};

struct ImpStmt;
using ImpStmtPtr = std::shared_ptr<const ImpStmt>;

struct ImpStmt {
    enum class Kind { Assign, Seq, If, While };
    Kind kind = Kind::Assign;

    // Assign
    int target = -1;
    ImpOp op = ImpOp::Const;
    std::vector<ImpOperand> operands;

    // Seq
    ImpStmtPtr first, second;

    // If / While
    int guard = -1;
    ImpStmtPtr body;

    bool has_ml = false;

    bool is_ml_assign() const { return kind == Kind::Assign && op == ImpOp::MlRead; }
};

struct ImpProgram {
    ImpStmtPtr root;
    std::vector<std::string> vars;

    int var_id(const std::string& name) const;
};

// Line-oriented syntax:
//   k := mlread x 0; i := const 1; b := le i k;
//   while b { v := mlread x i; i := add i 1; b := le i k }
// Guards are variables holding 0/1; `x` names the input digit list.
ImpProgram parse_imperative(const std::string& text);

// ============================================================================
// Stores
// ============================================================================

// nullopt is the bottom store: "this execution path not taken".
using ConcStore = std::optional<std::vector<int64_t>>;
using AbsStore = std::optional<std::vector<Interval>>;

// Concrete and abstract branch filters. A Top guard passes both abstract
// filters; a bottom store passes neither.
ConcStore iota_filter(bool b, const ConcStore& sigma, int var);
AbsStore iota_filter_abs(bool b, const AbsStore& sigma, int var);

// Componentwise joins with bottom as identity.
ConcStore join_store(const ConcStore& a, const ConcStore& b);
AbsStore join_store_abs(const AbsStore& a, const AbsStore& b);
bool leq_store_abs(const AbsStore& a, const AbsStore& b);

// ============================================================================
// Ground-truth / standard semantics
// ============================================================================

struct ImpConcreteCtx {
    const std::vector<DigitInstance>* digits = nullptr;
    bool ground_truth = true;
    int64_t iteration_limit = 10000;
};

ConcStore eval_imperative_concrete(const ImpProgram& p, ConcStore sigma,
                                   const ImpConcreteCtx& ctx);

inline ConcStore eval_imperative_gt(const ImpProgram& p, ConcStore sigma,
                                    const std::vector<DigitInstance>* digits,
                                    int64_t limit = 10000) {
    return eval_imperative_concrete(p, std::move(sigma), ImpConcreteCtx{digits, true, limit});
}

// ============================================================================
// Conformal semantics
// ============================================================================

// Threshold schedule for the ML assignment instances of one run, keyed by
// execution order. Recorded from the calibration threads once per trial and
// replayed per test input; both paths walk the identical unrolled structure.
struct MlSchedule {
    std::vector<double> taus;
    std::vector<int> survivors;
};

struct ImpTraceStep {
    int iteration = 0;
    AbsStore abs;
    std::vector<ConcStore> cal;
    double eps_body = 0.0;
};

struct ImpOptions {
    double eps = 0.1;
    double delta = 0.05;
    // Assign the whole epsilon share of a sequence to the side that contains
    // ML assignments (ML-free sides get 0); otherwise halve it evenly.
    bool skip_ml_free = true;
    int64_t unroll_limit = 10000;

    // Fixture hook: overrides the ML prediction interval per instance.
    std::function<std::optional<Interval>(int instance, double eps)> ml_override;

    MlSchedule* record_schedule = nullptr;  // fill from live calibration
    const MlSchedule* playback = nullptr;   // use recorded thresholds
    std::vector<ImpTraceStep>* loop_trace = nullptr;
};

struct JointState {
    bool abs_enabled = true;
    AbsStore abs;
    std::vector<ConcStore> cal;
    ExampleRef cur;
    std::vector<ExampleRef> cal_refs;
    const DigitListDataset* data = nullptr;
};

struct JointResult {
    AbsStore abs;
    std::vector<ConcStore> cal;
    int warnings = 0;
    int64_t unrolls = 0;
};

// Figure-style conformal execution: the abstract store advances through
// abstract transformers and per-instance conformal predictors; calibration
// stores advance through the ground truth semantics, filtered out of any
// calibration set once they take a different path.
JointResult eval_imperative_conformal(const ImpProgram& p, JointState state,
                                      const ImpOptions& opt);

// ============================================================================
// Benchmark pipeline
// ============================================================================

// Calibrated evaluator for one while-language program: records the threshold
// schedules once per calibration set, then replays them per test input.
class ImpPipeline {
public:
    ImpPipeline(const ImpProgram& p, const DigitListDataset* data, std::string out_var);

    void calibrate(const std::vector<ExampleRef>& cal, double eps, double delta,
                   const SplitPolicy& policy, const ImpOptions& base = {});

    struct Outputs {
        int64_t ground_truth = 0;
        int64_t standard = 0;
        AbstractValue direct;
        AbstractValue compositional;
        AbstractValue full;
        int empty_meets = 0;
        int warnings = 0;
    };
    Outputs evaluate(ExampleRef x) const;

    // The two operands of the final meet: the conformal machinery at its
    // budget share, and the direct prediction at its own share.
    AbstractValue machinery_operand(ExampleRef x) const;
    AbstractValue direct_operand(int64_t standard_value) const;

    int calibration_warnings() const { return calib_warnings_; }

private:
    int64_t concrete_out(ExampleRef x, bool ground_truth) const;
    AbstractValue abstract_out(ExampleRef x, const MlSchedule& sched, double eps,
                               int* warnings) const;

    const ImpProgram& prog_;
    const DigitListDataset* data_;
    int out_var_;
    ImpOptions base_;

    MlSchedule sched_comp_;  // machinery at the whole budget
    MlSchedule sched_full_;  // machinery at its share of the split budget
    double eps_comp_ = 0.0;
    double eps_full_mach_ = 0.0;
    DirectPredictor direct_solo_;
    DirectPredictor direct_share_;
    int calib_warnings_ = 0;
};

} // namespace csem
