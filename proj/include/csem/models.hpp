#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "csem/conformal.hpp"
#include "csem/eval.hpp"

namespace csem {

// ============================================================================
// Simulated digit classifier
// ============================================================================

// One simulated handwritten digit: the true label plus a deterministic score
// vector. Noisy instances get a weaker correct-label logit, scaled by eta, so
// top-1 accuracy degrades monotonically as eta grows.
struct DigitInstance {
    int true_label = 0;
    bool noisy = false;
    std::array<double, 10> scores{};

    int predicted() const;
};

std::vector<DigitInstance> gen_digit_dataset(int n, double eta, uint64_t seed,
                                             double noisy_fraction = 0.8);

// Smallest interval enclosing {y | scores[y] >= tau}; the argmax singleton
// when that set is empty.
Interval classifier_conformal(const DigitInstance& inst, double tau);

// Lists of digits, the input domain of the list-processing suite. An optional
// header block of extra digits sits in front of the payload (the control-flow
// suite reads its loop bound from there).
struct DigitListDataset {
    std::vector<std::vector<DigitInstance>> lists;
    int header = 0; // leading instances that are not part of the payload
};

DigitListDataset gen_digit_lists(int n, double eta, uint64_t seed, int min_len = 4,
                                 int max_len = 10, int header = 0,
                                 double noisy_fraction = 0.8);

// The "digits" ML component: reads the payload labels of a digit list.
class DigitListOracle : public MLOracle {
public:
    explicit DigitListOracle(const DigitListDataset* data) : data_(data) {}

    Value ground_truth(ExampleRef x) const override;
    Value predict(ExampleRef x) const override;
    double score_output(ExampleRef x, const Value& y) const override;
    std::unique_ptr<CalibratedML> calibrate(const std::vector<ExampleRef>& cal, double eps,
                                            double delta, AbstractMode mode) const override;

    const std::vector<DigitInstance>& payload(ExampleRef x) const;
    const std::vector<DigitInstance>& whole_list(ExampleRef x) const;

private:
    const DigitListDataset* data_;
};

// ============================================================================
// Simulated object detector
// ============================================================================

struct TrueDetection {
    Cat cat;
    int n = 0; // x center, px
    int m = 0; // y center, px
};

struct PredictedDetection {
    std::vector<double> s; // category scores
    int n_hat = 0;
    int m_hat = 0;
    int w_hat = 1;
    int h_hat = 1;

    int argmax_cat() const;
    double top_score() const;
};

struct SceneGenConfig {
    int width = 640;
    int height = 480;
    int max_objects = 12;
    double mean_objects = 4.0;
    double p_person = 0.5;
    // detector noise
    double center_sigma = 8.0;
    double miss_rate = 0.005;
    double spurious_rate = 0.15; // expected spurious detections per scene
    double correct_logit = 2.2;
    double logit_sigma = 0.8;
};

struct Scene {
    std::vector<TrueDetection> truths;
    std::vector<PredictedDetection> preds;
};

struct SceneDataset {
    std::vector<Scene> scenes;
    SceneGenConfig config;
};

std::vector<TrueDetection> gen_scene_truths(const SceneGenConfig& cfg, uint64_t seed,
                                            int n_cats);
std::vector<PredictedDetection> detector_predict(const std::vector<TrueDetection>& truths,
                                                 const SceneGenConfig& cfg, uint64_t seed,
                                                 int n_cats);
SceneDataset gen_scene_dataset(int n, const SceneGenConfig& cfg, uint64_t seed, int n_cats);

// Per-truth argmax over box overlap (identical-size boxes centered at the
// truth and the candidate); ties break toward the smaller center distance,
// then the lower index. Many-to-one matches are allowed.
std::vector<int> match_detections(const std::vector<TrueDetection>& truths,
                                  const std::vector<PredictedDetection>& preds);

// Scene-level conformity scores: the "certain" category score, the idk
// category score, and the two normalized center offsets. An empty scene is
// trivially covered: (1, 1, 0, 0).
struct DetectionScores {
    double g_d1 = 1.0;
    double g_d1p = 1.0;
    double g_d2 = 0.0;
    double g_d3 = 0.0;
};
DetectionScores detection_scores(const std::vector<TrueDetection>& truths,
                                 const std::vector<PredictedDetection>& preds,
                                 const std::vector<int>& matching);

struct DetectorThresholds {
    double tau_d1 = -std::numeric_limits<double>::infinity();
    double tau_d1p = -std::numeric_limits<double>::infinity();
    double tau_d2 = std::numeric_limits<double>::infinity();
    double tau_d3 = std::numeric_limits<double>::infinity();
    std::array<double, 4> deltas{};
};

// Calibrates the four streams, splitting eps (and delta) into equal shares.
// The location scores are negated on the way in so that larger always means
// more conforming, and the thresholds un-negated on the way out.
DetectorThresholds calibrate_detector(const SceneDataset& data,
                                      const std::vector<ExampleRef>& cal, double eps,
                                      double delta);

// Per prediction: category set {c | s_c >= tau_d1'} (argmax fallback when
// empty), center intervals of radius tau_d2*w / tau_d3*h clamped to the
// canvas, flag true# iff the top score clears tau_d1.
ListA conformal_detector(const std::vector<PredictedDetection>& preds,
                         const DetectorThresholds& th, int width, int height,
                         int* warnings = nullptr);

// The "detect" ML component over a scene dataset.
class DetectOracle : public MLOracle {
public:
    explicit DetectOracle(const SceneDataset* data) : data_(data) {}

    Value ground_truth(ExampleRef x) const override;
    Value predict(ExampleRef x) const override;
    double score_output(ExampleRef x, const Value& y) const override;
    std::unique_ptr<CalibratedML> calibrate(const std::vector<ExampleRef>& cal, double eps,
                                            double delta, AbstractMode mode) const override;

private:
    const SceneDataset* data_;
};

// ============================================================================
// Dataset snapshots (line-delimited JSON)
// ============================================================================

void save_digit_lists(const std::string& path, const DigitListDataset& data);
DigitListDataset load_digit_lists(const std::string& path);
void save_scene_dataset(const std::string& path, const SceneDataset& data);
SceneDataset load_scene_dataset(const std::string& path);

} // namespace csem
