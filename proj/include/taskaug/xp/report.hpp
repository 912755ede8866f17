#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taskaug/gan/generator.hpp"
#include "taskaug/seg/unet.hpp"
#include "taskaug/xp/matrix.hpp"
#include "taskaug/xp/wilcoxon.hpp"

namespace taskaug::xp {

struct Comparison {
    std::string baseline;
    std::map<std::string, double> p_values;     // structure -> p
    std::map<std::string, bool> significant;    // p < 0.05
};

struct MethodSummary {
    std::string method_id;
    int n_labelled = 1;
    std::map<std::string, double> mean_dice;  // structure -> mean over runs x subjects
    std::vector<Comparison> comparisons;
    int n_runs = 0;
};

// Means over all non-failed runs x test subjects, plus two-sided Wilcoxon
// signed-rank tests against the designated baselines paired per
// (subset, restart, subject). Throws UnpairedRuns when the pairing key
// multisets differ; failed runs are excluded with a warning.
std::vector<MethodSummary> summarize(
    const std::vector<RunResult>& results,
    const std::vector<std::pair<std::string, std::string>>& baseline_pairs);

// (a) CSV + aligned text table shaped rows=methods, columns=RV/Myo/LV per
// n_labelled; (b) significance CSV per comparison.
void emit_report(const std::vector<MethodSummary>& summaries, const std::string& out_dir);

// Raw per-subject metric rows: method,n_labelled,subset,restart,subject,
// structure,dice.
void emit_dice_csv(const std::vector<RunResult>& results, const std::string& path);

// Reference table I/O: "method,rv_1,myo_1,lv_1,rv_3,myo_3,lv_3" rows.
struct ReferenceRow {
    std::string method;
    std::array<double, 6> values{};
};
std::vector<ReferenceRow> load_reference_table(const std::string& csv_path);

// Grayscale / color image emission (PGM / PPM, 8-bit).
void write_pgm(const Tensor& image_hw, const std::string& path);
void write_ppm(const std::vector<std::uint8_t>& rgb, int h, int w, const std::string& path);

// Panel per requested slice: input | ground truth | one column per method
// prediction, labels color-coded over the image.
void emit_qualitative_panel(const data::VolumeRecord& rec, int slice,
                            const std::vector<std::pair<std::string, seg::SegmentationNetwork*>>&
                                methods,
                            const std::string& out_path);

// Input image followed by n_samples generator outputs for the same slice.
void emit_generator_sheet(gan::GeneratorNetwork& gen, const data::VolumeRecord& rec, int slice,
                          int n_samples, std::uint64_t seed, const std::string& out_path);

}  // namespace taskaug::xp
