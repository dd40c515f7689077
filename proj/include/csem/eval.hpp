#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "csem/program.hpp"
#include "csem/transformers.hpp"

namespace csem {

// Interval abstractions are the default; the set mode replaces integer
// intervals with explicit enumerated sets throughout a run.
enum class AbstractMode { Interval, SetMode };

// Handle to a dataset-backed example; plain values cover inputs that are
// ordinary program values.
struct ExampleRef {
    int index = -1;
    bool valid() const { return index >= 0; }
};

struct ProgInput {
    std::optional<Value> plain;
    ExampleRef ref;

    static ProgInput of_value(Value v) { return ProgInput{std::move(v), {}}; }
    static ProgInput of_ref(int index) { return ProgInput{std::nullopt, ExampleRef{index}}; }
};

// A conformal predictor for one ML site, frozen after calibration.
class CalibratedML {
public:
    virtual ~CalibratedML() = default;
    // warnings, when given, is incremented for each degenerate fallback taken
    // while building the output (e.g. an empty category set replaced by the
    // argmax category).
    virtual AbstractValue abstract_output(ExampleRef x, int* warnings = nullptr) const = 0;
};

// A simulated ML component bound to a dataset: the ground truth function, the
// point predictor, its scoring function, and conformal calibration.
class MLOracle {
public:
    virtual ~MLOracle() = default;
    virtual Value ground_truth(ExampleRef x) const = 0;
    virtual Value predict(ExampleRef x) const = 0;
    // g(x, y) for candidate outputs; used when a direct predictor sits at the
    // ML site itself.
    virtual double score_output(ExampleRef x, const Value& y) const = 0;
    virtual std::unique_ptr<CalibratedML> calibrate(const std::vector<ExampleRef>& cal,
                                                    double eps, double delta,
                                                    AbstractMode mode) const = 0;
};

using OracleMap = std::map<Comp, const MLOracle*>;

// Records concrete values at requested nodes during evaluation; used to build
// calibration traces for the per-point direct predictors.
struct NodeRecorder {
    const std::vector<char>* want = nullptr;
    std::vector<std::optional<Value>>* out = nullptr;
};

Value eval_ground_truth(const Program& p, const ProgInput& x, const OracleMap& oracles,
                        NodeRecorder* rec = nullptr);
Value eval_standard(const Program& p, const ProgInput& x, const OracleMap& oracles,
                    NodeRecorder* rec = nullptr);

// Applied at each Apply node after its transformer runs; the full conformal
// semantics uses this to meet in the direct predictions.
using MeetHook = std::function<AbstractValue(const Expr&, AbstractValue)>;

// Abstract interpretation of the program with the given per-site ML outputs.
AbstractValue eval_abstract(const Program& p, const TypeInfo& info, const ProgInput& x,
                            const std::vector<AbstractValue>& site_outputs, AbstractMode mode,
                            const MeetHook* hook = nullptr);

// Compositional conformal semantics: ML sites produce their calibrated
// abstract outputs, everything else runs through the abstract transformers.
AbstractValue eval_compositional(const Program& p, const TypeInfo& info, const ProgInput& x,
                                 const std::vector<const CalibratedML*>& predictors,
                                 AbstractMode mode);

// Abstraction of a plain value under the given mode (integers become
// explicit sets in set mode).
AbstractValue abstract_of_value(const Value& v, AbstractMode mode);

} // namespace csem
