#include "csem/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "csem/rng.hpp"

namespace csem {

// ============================================================================
// Digit classifier
// ============================================================================

int DigitInstance::predicted() const {
    return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

namespace {

// Noise model: a noisy instance becomes "confused" with probability
// proportional to eta. Confused instances collapse to a fixed low confidence
// in the true label and put their mass on a wrong label at a fixed offset.
// The constant confidence floor makes the calibrated threshold land on a tie
// (ties count as covered), so prediction sets are stable across the error
// budget splits; the fixed offset keeps misread magnitudes clustered. The
// random draws do not depend on eta, so per-instance degradation is monotone
// in it.
constexpr double kConfusionPerEta = 0.6;
constexpr double kConfusedTrueScore = 0.05;
constexpr double kConfusedWrongScore = 0.80;
constexpr int kConfusedOffset = 4;

DigitInstance gen_digit(Rng& rng, double eta, double noisy_fraction) {
    DigitInstance d;
    d.true_label = static_cast<int>(rng.next_below(10));
    d.noisy = rng.next_bool(noisy_fraction);

    double u_confused = rng.next_double();
    double confidence = rng.next_uniform(0.90, 0.98);
    bool confused = d.noisy && u_confused < kConfusionPerEta * eta;

    if (confused) {
        int wrong = d.true_label <= 5 ? d.true_label + kConfusedOffset
                                      : d.true_label - kConfusedOffset;
        double rest = (1.0 - kConfusedTrueScore - kConfusedWrongScore) / 8.0;
        d.scores.fill(rest);
        d.scores[static_cast<size_t>(d.true_label)] = kConfusedTrueScore;
        d.scores[static_cast<size_t>(wrong)] = kConfusedWrongScore;
    } else {
        // Noisy-but-readable instances are slightly flatter than clean ones.
        double top = d.noisy ? confidence * 0.93 : confidence;
        d.scores.fill((1.0 - top) / 9.0);
        d.scores[static_cast<size_t>(d.true_label)] = top;
    }
    return d;
}

} // namespace

std::vector<DigitInstance> gen_digit_dataset(int n, double eta, uint64_t seed,
                                             double noisy_fraction) {
    std::vector<DigitInstance> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, 0x1157, static_cast<uint64_t>(i)));
        out.push_back(gen_digit(rng, eta, noisy_fraction));
    }
    return out;
}

Interval classifier_conformal(const DigitInstance& inst, double tau) {
    int lo = -1, hi = -1;
    for (int y = 0; y < 10; ++y) {
        if (inst.scores[static_cast<size_t>(y)] >= tau) {
            if (lo < 0) lo = y;
            hi = y;
        }
    }
    if (lo < 0) {
        int p = inst.predicted();
        return Interval(p, p);
    }
    return Interval(lo, hi);
}

DigitListDataset gen_digit_lists(int n, double eta, uint64_t seed, int min_len, int max_len,
                                 int header, double noisy_fraction) {
    DigitListDataset data;
    data.header = header;
    data.lists.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, 0x715f, static_cast<uint64_t>(i)));
        int len = header + static_cast<int>(rng.next_int(min_len, max_len));
        std::vector<DigitInstance> list;
        list.reserve(static_cast<size_t>(len));
        for (int j = 0; j < len; ++j) list.push_back(gen_digit(rng, eta, noisy_fraction));
        data.lists.push_back(std::move(list));
    }
    return data;
}

// ----------------------------------------------------------------------------
// DigitListOracle
// ----------------------------------------------------------------------------

const std::vector<DigitInstance>& DigitListOracle::whole_list(ExampleRef x) const {
    if (!x.valid() || static_cast<size_t>(x.index) >= data_->lists.size()) {
        fail(ErrorKind::OracleUnavailable, "digit oracle: example index out of range");
    }
    return data_->lists[static_cast<size_t>(x.index)];
}

const std::vector<DigitInstance>& DigitListOracle::payload(ExampleRef x) const {
    return whole_list(x);
}

Value DigitListOracle::ground_truth(ExampleRef x) const {
    const auto& list = whole_list(x);
    ListV out;
    for (size_t i = static_cast<size_t>(data_->header); i < list.size(); ++i) {
        out.elems.push_back(Value(static_cast<int64_t>(list[i].true_label)));
    }
    return Value(std::move(out));
}

Value DigitListOracle::predict(ExampleRef x) const {
    const auto& list = whole_list(x);
    ListV out;
    for (size_t i = static_cast<size_t>(data_->header); i < list.size(); ++i) {
        out.elems.push_back(Value(static_cast<int64_t>(list[i].predicted())));
    }
    return Value(std::move(out));
}

double DigitListOracle::score_output(ExampleRef x, const Value& y) const {
    const auto& list = whole_list(x);
    const auto& elems = y.as_list().elems;
    size_t payload = list.size() - static_cast<size_t>(data_->header);
    if (elems.size() != payload) return -std::numeric_limits<double>::infinity();
    double s = 1.0;
    for (size_t i = 0; i < payload; ++i) {
        int64_t label = elems[i].as_int();
        if (label < 0 || label > 9) return -std::numeric_limits<double>::infinity();
        s = std::min(s, list[i + static_cast<size_t>(data_->header)]
                            .scores[static_cast<size_t>(label)]);
    }
    return s;
}

namespace {

class DigitCalibrated : public CalibratedML {
public:
    DigitCalibrated(const DigitListOracle* oracle, int header, double tau, AbstractMode mode)
        : oracle_(oracle), header_(header), tau_(tau), mode_(mode) {}

    AbstractValue abstract_output(ExampleRef x, int*) const override {
        const auto& list = oracle_->whole_list(x);
        ListA out;
        for (size_t i = static_cast<size_t>(header_); i < list.size(); ++i) {
            out.entries.emplace_back(element_set(list[i]), Kleene::True);
        }
        return AbstractValue(std::move(out));
    }

private:
    AbstractValue element_set(const DigitInstance& inst) const {
        if (mode_ == AbstractMode::Interval) {
            return AbstractValue(classifier_conformal(inst, tau_));
        }
        std::vector<int64_t> vals;
        for (int y = 0; y < 10; ++y) {
            if (inst.scores[static_cast<size_t>(y)] >= tau_) vals.push_back(y);
        }
        if (vals.empty()) vals.push_back(inst.predicted());
        return AbstractValue(IntSet(std::move(vals)));
    }

    const DigitListOracle* oracle_;
    int header_;
    double tau_;
    AbstractMode mode_;
};

} // namespace

std::unique_ptr<CalibratedML> DigitListOracle::calibrate(const std::vector<ExampleRef>& cal,
                                                         double eps, double delta,
                                                         AbstractMode mode) const {
    // Whole-list conformity: the worst correct-label score across the payload.
    // Covering every element is exactly the event min_i s_i(y_i*) >= tau.
    std::vector<double> scores;
    scores.reserve(cal.size());
    for (ExampleRef r : cal) {
        const auto& list = whole_list(r);
        double s = 1.0;
        for (size_t i = static_cast<size_t>(data_->header); i < list.size(); ++i) {
            s = std::min(s, list[i].scores[static_cast<size_t>(list[i].true_label)]);
        }
        scores.push_back(s);
    }
    ConformalPredictor cp = pac_calibrate(std::move(scores), eps, delta);
    return std::make_unique<DigitCalibrated>(this, data_->header, cp.tau, mode);
}

// ============================================================================
// Object detector
// ============================================================================

int PredictedDetection::argmax_cat() const {
    return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

double PredictedDetection::top_score() const { return *std::max_element(s.begin(), s.end()); }

namespace {

std::vector<double> cat_scores(Rng& rng, int n_cats, int correct, double correct_logit,
                               double logit_sigma) {
    std::vector<double> logits(static_cast<size_t>(n_cats));
    for (int c = 0; c < n_cats; ++c) logits[static_cast<size_t>(c)] = rng.next_normal(0.0, 0.4);
    if (correct >= 0) {
        logits[static_cast<size_t>(correct)] = correct_logit + rng.next_normal(0.0, logit_sigma);
    }
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& l : logits) {
        l = std::exp(l - mx);
        sum += l;
    }
    for (double& l : logits) l /= sum;
    return logits;
}

int clamp_to(int v, int lo, int hi) { return std::max(lo, std::min(hi, v)); }

} // namespace

std::vector<TrueDetection> gen_scene_truths(const SceneGenConfig& cfg, uint64_t seed,
                                            int n_cats) {
    Rng rng(seed);
    // Binomial(max_objects, mean/max) object count: bounded support with a
    // configurable mean.
    double p = cfg.max_objects > 0 ? cfg.mean_objects / cfg.max_objects : 0.0;
    int count = 0;
    for (int i = 0; i < cfg.max_objects; ++i) {
        if (rng.next_bool(p)) ++count;
    }
    std::vector<TrueDetection> truths;
    truths.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        TrueDetection t;
        t.cat = Cat{rng.next_bool(cfg.p_person) ? 0 : (n_cats > 1 ? 1 : 0)};
        t.n = static_cast<int>(rng.next_below(static_cast<uint64_t>(cfg.width)));
        t.m = static_cast<int>(rng.next_below(static_cast<uint64_t>(cfg.height)));
        truths.push_back(t);
    }
    return truths;
}

std::vector<PredictedDetection> detector_predict(const std::vector<TrueDetection>& truths,
                                                 const SceneGenConfig& cfg, uint64_t seed,
                                                 int n_cats) {
    Rng rng(seed);
    std::vector<PredictedDetection> preds;
    for (const TrueDetection& t : truths) {
        if (rng.next_bool(cfg.miss_rate)) continue;
        PredictedDetection p;
        p.n_hat = clamp_to(t.n + static_cast<int>(std::lround(rng.next_normal(0.0, cfg.center_sigma))),
                           0, cfg.width - 1);
        p.m_hat = clamp_to(t.m + static_cast<int>(std::lround(rng.next_normal(0.0, cfg.center_sigma))),
                           0, cfg.height - 1);
        p.w_hat = static_cast<int>(rng.next_int(40, 120));
        p.h_hat = static_cast<int>(rng.next_int(40, 120));
        p.s = cat_scores(rng, n_cats, t.cat.id, cfg.correct_logit, cfg.logit_sigma);
        preds.push_back(std::move(p));
    }
    // Spurious detections: low-confidence boxes at random positions.
    int spurious = 0;
    for (int i = 0; i < 8; ++i) {
        if (rng.next_bool(cfg.spurious_rate / 8.0)) ++spurious;
    }
    for (int i = 0; i < spurious; ++i) {
        PredictedDetection p;
        p.n_hat = static_cast<int>(rng.next_below(static_cast<uint64_t>(cfg.width)));
        p.m_hat = static_cast<int>(rng.next_below(static_cast<uint64_t>(cfg.height)));
        p.w_hat = static_cast<int>(rng.next_int(40, 120));
        p.h_hat = static_cast<int>(rng.next_int(40, 120));
        double top = rng.next_uniform(0.30, 0.55);
        int cat = static_cast<int>(rng.next_below(static_cast<uint64_t>(n_cats)));
        p.s.assign(static_cast<size_t>(n_cats), (1.0 - top) / std::max(1, n_cats - 1));
        p.s[static_cast<size_t>(cat)] = top;
        preds.push_back(std::move(p));
    }
    return preds;
}

SceneDataset gen_scene_dataset(int n, const SceneGenConfig& cfg, uint64_t seed, int n_cats) {
    SceneDataset data;
    data.config = cfg;
    data.scenes.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Scene s;
        s.truths = gen_scene_truths(cfg, derive_seed(seed, 0x5ce4e, static_cast<uint64_t>(i)),
                                    n_cats);
        s.preds = detector_predict(s.truths, cfg,
                                   derive_seed(seed, 0xde7ec7, static_cast<uint64_t>(i)), n_cats);
        data.scenes.push_back(std::move(s));
    }
    return data;
}

std::vector<int> match_detections(const std::vector<TrueDetection>& truths,
                                  const std::vector<PredictedDetection>& preds) {
    if (truths.empty()) return {};
    if (preds.empty()) fail(ErrorKind::NoCandidate, "no predicted detections to match");

    std::vector<int> match(truths.size(), 0);
    for (size_t i = 0; i < truths.size(); ++i) {
        const TrueDetection& t = truths[i];
        double best_overlap = -1.0;
        int64_t best_dist = 0;
        int best = 0;
        for (size_t j = 0; j < preds.size(); ++j) {
            const PredictedDetection& p = preds[j];
            // Overlap of two boxes of the prediction's size, one centered at
            // the truth, one at the prediction.
            double dx = std::abs(t.n - p.n_hat);
            double dy = std::abs(t.m - p.m_hat);
            double overlap = std::max(0.0, p.w_hat - dx) * std::max(0.0, p.h_hat - dy);
            int64_t dist = static_cast<int64_t>(dx * dx + dy * dy);
            if (overlap > best_overlap || (overlap == best_overlap && dist < best_dist)) {
                best_overlap = overlap;
                best_dist = dist;
                best = static_cast<int>(j);
            }
        }
        match[i] = best;
    }
    return match;
}

DetectionScores detection_scores(const std::vector<TrueDetection>& truths,
                                 const std::vector<PredictedDetection>& preds,
                                 const std::vector<int>& matching) {
    DetectionScores s;
    if (truths.empty()) return s; // trivially covered
    s.g_d1 = 0.0;
    s.g_d1p = 1.0;
    for (size_t i = 0; i < truths.size(); ++i) {
        const auto& p = preds[static_cast<size_t>(matching[i])];
        double cat_score = p.s[static_cast<size_t>(truths[i].cat.id)];
        s.g_d1 = std::max(s.g_d1, cat_score);
        s.g_d1p = std::min(s.g_d1p, cat_score);
        s.g_d2 = std::max(s.g_d2, std::abs(truths[i].n - p.n_hat) / static_cast<double>(p.w_hat));
        s.g_d3 = std::max(s.g_d3, std::abs(truths[i].m - p.m_hat) / static_cast<double>(p.h_hat));
    }
    return s;
}

DetectorThresholds calibrate_detector(const SceneDataset& data,
                                      const std::vector<ExampleRef>& cal, double eps,
                                      double delta) {
    std::vector<double> s1, s1p, s2, s3;
    s1.reserve(cal.size());
    s1p.reserve(cal.size());
    s2.reserve(cal.size());
    s3.reserve(cal.size());
    for (ExampleRef r : cal) {
        const Scene& sc = data.scenes.at(static_cast<size_t>(r.index));
        DetectionScores ds;
        if (!sc.truths.empty() && sc.preds.empty()) {
            // Nothing to match: the scene cannot be covered at any threshold.
            ds.g_d1 = ds.g_d1p = -std::numeric_limits<double>::infinity();
            ds.g_d2 = ds.g_d3 = std::numeric_limits<double>::infinity();
        } else if (!sc.truths.empty()) {
            ds = detection_scores(sc.truths, sc.preds, match_detections(sc.truths, sc.preds));
        }
        s1.push_back(ds.g_d1);
        s1p.push_back(ds.g_d1p);
        s2.push_back(-ds.g_d2);
        s3.push_back(-ds.g_d3);
    }

    DetectorThresholds th;
    double share_eps = eps / 4.0;
    double share_delta = delta / 4.0;
    th.deltas = {share_eps, share_eps, share_eps, share_eps};
    th.tau_d1 = pac_calibrate(std::move(s1), share_eps, share_delta).tau;
    th.tau_d1p = pac_calibrate(std::move(s1p), share_eps, share_delta).tau;
    th.tau_d2 = -pac_calibrate(std::move(s2), share_eps, share_delta).tau;
    th.tau_d3 = -pac_calibrate(std::move(s3), share_eps, share_delta).tau;
    return th;
}

ListA conformal_detector(const std::vector<PredictedDetection>& preds,
                         const DetectorThresholds& th, int width, int height, int* warnings) {
    ListA out;
    out.entries.reserve(preds.size());
    for (const PredictedDetection& p : preds) {
        CatSet cats;
        for (size_t c = 0; c < p.s.size(); ++c) {
            if (p.s[c] >= th.tau_d1p) cats.bits |= uint64_t{1} << c;
        }
        if (cats.empty()) {
            cats = CatSet::single(Cat{p.argmax_cat()});
            if (warnings) ++*warnings;
        }
        auto interval_around = [](int c, double radius, int limit) {
            if (!std::isfinite(radius)) return Interval(0, limit - 1);
            int64_t lo = static_cast<int64_t>(std::floor(c - radius));
            int64_t hi = static_cast<int64_t>(std::ceil(c + radius));
            lo = std::max<int64_t>(0, std::min<int64_t>(lo, limit - 1));
            hi = std::max<int64_t>(0, std::min<int64_t>(hi, limit - 1));
            return Interval(lo, hi);
        };
        TupleA det;
        det.elems.push_back(AbstractValue(cats));
        det.elems.push_back(AbstractValue(interval_around(p.n_hat, th.tau_d2 * p.w_hat, width)));
        det.elems.push_back(AbstractValue(interval_around(p.m_hat, th.tau_d3 * p.h_hat, height)));
        Kleene flag = p.top_score() >= th.tau_d1 ? Kleene::True : Kleene::Top;
        out.entries.emplace_back(AbstractValue(std::move(det)), flag);
    }
    return out;
}

// ----------------------------------------------------------------------------
// DetectOracle
// ----------------------------------------------------------------------------

namespace {

Value detection_value(Cat c, int n, int m) {
    TupleV t;
    t.elems = {Value(c), Value(static_cast<int64_t>(n)), Value(static_cast<int64_t>(m))};
    return Value(std::move(t));
}

class DetectCalibrated : public CalibratedML {
public:
    DetectCalibrated(const SceneDataset* data, DetectorThresholds th)
        : data_(data), th_(th) {}

    AbstractValue abstract_output(ExampleRef x, int* warnings) const override {
        const Scene& sc = data_->scenes.at(static_cast<size_t>(x.index));
        return AbstractValue(conformal_detector(sc.preds, th_, data_->config.width,
                                                data_->config.height, warnings));
    }

    const DetectorThresholds& thresholds() const { return th_; }

private:
    const SceneDataset* data_;
    DetectorThresholds th_;
};

} // namespace

Value DetectOracle::ground_truth(ExampleRef x) const {
    const Scene& sc = data_->scenes.at(static_cast<size_t>(x.index));
    ListV out;
    for (const TrueDetection& t : sc.truths) out.elems.push_back(detection_value(t.cat, t.n, t.m));
    return Value(std::move(out));
}

Value DetectOracle::predict(ExampleRef x) const {
    const Scene& sc = data_->scenes.at(static_cast<size_t>(x.index));
    ListV out;
    for (const PredictedDetection& p : sc.preds) {
        out.elems.push_back(detection_value(Cat{p.argmax_cat()}, p.n_hat, p.m_hat));
    }
    return Value(std::move(out));
}

double DetectOracle::score_output(ExampleRef x, const Value& y) const {
    return y == predict(x) ? 1.0 : 0.0;
}

std::unique_ptr<CalibratedML> DetectOracle::calibrate(const std::vector<ExampleRef>& cal,
                                                      double eps, double delta,
                                                      AbstractMode mode) const {
    if (mode == AbstractMode::SetMode) {
        fail(ErrorKind::Config, "the detection pipeline runs interval abstractions only");
    }
    return std::make_unique<DetectCalibrated>(data_, calibrate_detector(*data_, cal, eps, delta));
}

// ============================================================================
// Snapshots
// ============================================================================

using nlohmann::json;

void save_digit_lists(const std::string& path, const DigitListDataset& data) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot open " + path + " for writing");
    json meta = {{"kind", "digit_lists"}, {"header", data.header}};
    out << meta.dump() << "\n";
    for (const auto& list : data.lists) {
        json row = json::array();
        for (const auto& d : list) {
            row.push_back({{"label", d.true_label}, {"noisy", d.noisy}, {"scores", d.scores}});
        }
        out << row.dump() << "\n";
    }
}

DigitListDataset load_digit_lists(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Io, "empty snapshot " + path);
    json meta = json::parse(line);
    if (meta.value("kind", "") != "digit_lists") fail(ErrorKind::Io, "not a digit-list snapshot");
    DigitListDataset data;
    data.header = meta.value("header", 0);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json row = json::parse(line);
        std::vector<DigitInstance> list;
        for (const auto& jd : row) {
            DigitInstance d;
            d.true_label = jd.at("label").get<int>();
            d.noisy = jd.at("noisy").get<bool>();
            auto sc = jd.at("scores").get<std::vector<double>>();
            std::copy_n(sc.begin(), 10, d.scores.begin());
            list.push_back(d);
        }
        data.lists.push_back(std::move(list));
    }
    return data;
}

void save_scene_dataset(const std::string& path, const SceneDataset& data) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot open " + path + " for writing");
    json meta = {{"kind", "scenes"},
                 {"width", data.config.width},
                 {"height", data.config.height}};
    out << meta.dump() << "\n";
    for (const auto& sc : data.scenes) {
        json truths = json::array();
        for (const auto& t : sc.truths) truths.push_back({{"cat", t.cat.id}, {"n", t.n}, {"m", t.m}});
        json preds = json::array();
        for (const auto& p : sc.preds) {
            preds.push_back({{"s", p.s},
                             {"n", p.n_hat},
                             {"m", p.m_hat},
                             {"w", p.w_hat},
                             {"h", p.h_hat}});
        }
        out << json{{"truths", truths}, {"preds", preds}}.dump() << "\n";
    }
}

SceneDataset load_scene_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Io, "empty snapshot " + path);
    json meta = json::parse(line);
    if (meta.value("kind", "") != "scenes") fail(ErrorKind::Io, "not a scene snapshot");
    SceneDataset data;
    data.config.width = meta.value("width", 640);
    data.config.height = meta.value("height", 480);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json row = json::parse(line);
        Scene sc;
        for (const auto& jt : row.at("truths")) {
            sc.truths.push_back(
                TrueDetection{Cat{jt.at("cat").get<int>()}, jt.at("n").get<int>(), jt.at("m").get<int>()});
        }
        for (const auto& jp : row.at("preds")) {
            PredictedDetection p;
            p.s = jp.at("s").get<std::vector<double>>();
            p.n_hat = jp.at("n").get<int>();
            p.m_hat = jp.at("m").get<int>();
            p.w_hat = jp.at("w").get<int>();
            p.h_hat = jp.at("h").get<int>();
            sc.preds.push_back(std::move(p));
        }
        data.scenes.push_back(std::move(sc));
    }
    return data;
}

} // namespace csem
