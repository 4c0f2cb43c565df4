#include "hypercurate/metrics.hpp"

#include <cmath>
#include <string>

#include "hypercurate/errors.hpp"

namespace hypercurate {

void MultiLabelBatch::validate() const {
    if (classes < 1) throw ValidationError("multi-label batch needs at least one class");
    const std::size_t n = samples * classes;
    if (predictions.size() != n || targets.size() != n) {
        throw ValidationError("multi-label shape mismatch: expected " + std::to_string(samples) + "x" +
                              std::to_string(classes) + ", got " + std::to_string(predictions.size()) +
                              " predictions and " + std::to_string(targets.size()) + " targets");
    }
}

F1Report f1_multilabel(const MultiLabelBatch& batch) {
    batch.validate();
    F1Report r;
    r.per_class.resize(batch.classes);
    for (std::size_t i = 0; i < batch.samples; ++i) {
        for (std::size_t k = 0; k < batch.classes; ++k) {
            const bool p = batch.predictions[i * batch.classes + k] != 0;
            const bool t = batch.targets[i * batch.classes + k] != 0;
            auto& c = r.per_class[k];
            if (p && t) ++c.tp;
            else if (p) ++c.fp;
            else if (t) ++c.fn;
        }
    }
    std::uint64_t tp = 0, fp = 0, fn = 0;
    double macro_sum = 0.0;
    std::size_t macro_n = 0;
    for (auto& c : r.per_class) {
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
        const std::uint64_t denom = 2 * c.tp + c.fp + c.fn;
        c.counted = denom > 0;
        c.f1 = c.counted ? 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom) : 0.0;
        if (c.counted) {
            macro_sum += c.f1;
            ++macro_n;
        }
    }
    const std::uint64_t denom = 2 * tp + fp + fn;
    // Nothing predicted and nothing to find: perfect agreement.
    r.micro = denom > 0 ? 2.0 * static_cast<double>(tp) / static_cast<double>(denom) : 1.0;
    r.macro = macro_n > 0 ? macro_sum / static_cast<double>(macro_n) : 1.0;
    return r;
}

double f1_multilabel(const MultiLabelBatch& batch, F1Mode mode) { return f1_multilabel(batch).score(mode); }

void MaskBatch::validate() const {
    if (classes < 1 || classes >= kIgnore) throw ValidationError("mask batch class count must be in [1,254]");
    const std::size_t n = samples * pixels_per_sample();
    if (predictions.size() != n || targets.size() != n) {
        throw ValidationError("mask shape mismatch: expected " + std::to_string(n) + " pixels, got " +
                              std::to_string(predictions.size()) + " predictions and " +
                              std::to_string(targets.size()) + " targets");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if ((targets[i] >= classes && targets[i] != kIgnore) || (predictions[i] >= classes && predictions[i] != kIgnore)) {
            throw ValidationError("class index " +
                                  std::to_string(targets[i] >= classes && targets[i] != kIgnore ? targets[i] : predictions[i]) +
                                  " >= class count " + std::to_string(classes) + " at pixel " + std::to_string(i));
        }
    }
}

namespace {

/// Per-class intersection/union counts over pixels [begin, end).
std::vector<ClassIoU> confusion(const MaskBatch& b, std::size_t begin, std::size_t end) {
    std::vector<ClassIoU> out(b.classes);
    for (std::size_t i = begin; i < end; ++i) {
        const std::uint8_t t = b.targets[i];
        if (t == MaskBatch::kIgnore) continue;
        const std::uint8_t p = b.predictions[i];
        if (p == t) {
            ++out[t].intersection;
            ++out[t].union_;
        } else {
            ++out[t].union_;
            if (p != MaskBatch::kIgnore) ++out[p].union_;
        }
    }
    return out;
}

double mean_present(std::vector<ClassIoU>& cls) {
    double sum = 0.0;
    std::size_t n = 0;
    for (auto& c : cls) {
        c.present = c.union_ > 0;
        c.iou = c.present ? static_cast<double>(c.intersection) / static_cast<double>(c.union_) : 0.0;
        if (c.present) {
            sum += c.iou;
            ++n;
        }
    }
    if (n == 0) throw ValidationError("mIoU undefined: no non-ignored pixels");
    return sum / static_cast<double>(n);
}

}  // namespace

IoUReport miou(const MaskBatch& batch, bool per_image) {
    batch.validate();
    IoUReport r;
    r.per_class = confusion(batch, 0, batch.targets.size());
    r.miou = mean_present(r.per_class);
    if (per_image) {
        double sum = 0.0;
        std::size_t n = 0;
        const std::size_t px = batch.pixels_per_sample();
        for (std::size_t s = 0; s < batch.samples; ++s) {
            auto cls = confusion(batch, s * px, (s + 1) * px);
            bool any = false;
            for (const auto& c : cls) any = any || c.union_ > 0;
            if (!any) continue;
            sum += mean_present(cls);
            ++n;
        }
        r.miou = sum / static_cast<double>(n);
    }
    return r;
}

void RegressionBatch::validate() const {
    if (samples < 1 || params < 1) throw ValidationError("regression batch must have N >= 1 and P >= 1");
    const std::size_t n = samples * params;
    if (predictions.size() != n || targets.size() != n) {
        throw ValidationError("regression shape mismatch: expected " + std::to_string(samples) + "x" +
                              std::to_string(params));
    }
    if (baseline_means.size() != params) {
        throw ValidationError("baseline means must have " + std::to_string(params) + " entries");
    }
    for (double m : baseline_means) {
        if (!std::isfinite(m)) throw ValidationError("baseline means must be finite");
    }
}

NormalizedMseReport normalized_mse(const RegressionBatch& batch) {
    batch.validate();
    NormalizedMseReport r;
    r.mse.assign(batch.params, 0.0);
    r.baseline_mse.assign(batch.params, 0.0);
    for (std::size_t i = 0; i < batch.samples; ++i) {
        for (std::size_t p = 0; p < batch.params; ++p) {
            const double t = batch.targets[i * batch.params + p];
            const double e = batch.predictions[i * batch.params + p] - t;
            const double b = batch.baseline_means[p] - t;
            r.mse[p] += e * e;
            r.baseline_mse[p] += b * b;
        }
    }
    const auto n = static_cast<double>(batch.samples);
    for (std::size_t p = 0; p < batch.params; ++p) {
        r.mse[p] /= n;
        r.baseline_mse[p] /= n;
        if (!(r.baseline_mse[p] > 0.0)) {
            throw ValidationError("baseline MSE of parameter " + std::to_string(p) +
                                  " is zero (targets equal the training mean)");
        }
        r.ratios.push_back(r.mse[p] / r.baseline_mse[p]);
        r.sum_form += r.ratios.back();
    }
    r.percent_form = 100.0 * r.sum_form / static_cast<double>(batch.params);
    return r;
}

}  // namespace hypercurate
