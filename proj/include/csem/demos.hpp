#pragma once

#include <string>

#include "csem/bench.hpp"
#include "csem/imperative.hpp"

namespace csem {

// Worked example: a people-counting query over one fixture scene with fixed
// conformal detections and a fixed direct radius. Exercises the real
// evaluators and meet; only the predictor outputs are fixtures.
struct CountQueryDemo {
    int64_t ground_truth = 0;
    int64_t standard = 0;
    AbstractValue direct;
    AbstractValue compositional;
    AbstractValue full;
};
CountQueryDemo run_count_query_demo();

// Worked example: the read-digits-until-large loop on a two-image input with
// two calibration stores and fixed per-iteration prediction intervals.
struct LoopDemo {
    ImpProgram program;
    JointResult result;
    std::vector<ImpTraceStep> trace;
    int k_var = -1;
    int v_var = -1;
};
LoopDemo run_loop_demo();

std::string describe(const CountQueryDemo& d);
std::string describe(const LoopDemo& d);

} // namespace csem
