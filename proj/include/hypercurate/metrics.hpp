#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace hypercurate {

/// N x K boolean label matrices, row-major.
struct MultiLabelBatch {
    std::size_t samples = 0;
    std::size_t classes = 0;
    std::vector<std::uint8_t> predictions;
    std::vector<std::uint8_t> targets;

    void validate() const;
};

enum class F1Mode { micro, macro };

struct ClassF1 {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    double f1 = 0.0;
    /// False when the class never occurs in predictions or targets; such
    /// classes are left out of the macro average.
    bool counted = false;
};

struct F1Report {
    double micro = 0.0;
    double macro = 0.0;
    std::vector<ClassF1> per_class;

    double score(F1Mode m) const { return m == F1Mode::micro ? micro : macro; }
};

F1Report f1_multilabel(const MultiLabelBatch& batch);
double f1_multilabel(const MultiLabelBatch& batch, F1Mode mode);

/// N class-index masks of height x width; 255 marks ignored target pixels.
struct MaskBatch {
    std::size_t samples = 0;
    std::size_t height = 128;
    std::size_t width = 128;
    std::size_t classes = 0;
    std::vector<std::uint8_t> predictions;
    std::vector<std::uint8_t> targets;

    static constexpr std::uint8_t kIgnore = 255;
    std::size_t pixels_per_sample() const { return height * width; }
    void validate() const;
};

struct ClassIoU {
    std::uint64_t intersection = 0;
    std::uint64_t union_ = 0;
    double iou = 0.0;
    bool present = false;
};

struct IoUReport {
    double miou = 0.0;
    std::vector<ClassIoU> per_class;
};

/// Pooled confusion over all non-ignored pixels; the mean runs over classes
/// present in targets or predictions. With `per_image`, the mIoU of each
/// sample is averaged instead (per-class table stays pooled).
IoUReport miou(const MaskBatch& batch, bool per_image = false);

/// N x P predictions and targets plus training-set means per parameter.
struct RegressionBatch {
    std::size_t samples = 0;
    std::size_t params = 0;
    std::vector<double> predictions;
    std::vector<double> targets;
    std::vector<double> baseline_means;

    void validate() const;
};

struct NormalizedMseReport {
    /// Sum over parameters of MSE / MSE of the mean predictor.
    double sum_form = 0.0;
    /// 100 * sum_form / P.
    double percent_form = 0.0;
    std::vector<double> ratios;
    std::vector<double> mse;
    std::vector<double> baseline_mse;
};

NormalizedMseReport normalized_mse(const RegressionBatch& batch);

}  // namespace hypercurate
