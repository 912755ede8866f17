#include "taskaug/xp/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "taskaug/core/errors.hpp"
#include "taskaug/data/slice_batch.hpp"
#include "taskaug/seg/losses.hpp"
#include "taskaug/train/trainer.hpp"

namespace taskaug::xp {

namespace fs = std::filesystem;

namespace {

constexpr const char* kStructures[3] = {"RV", "Myo", "LV"};

struct PairKey {
    int subset, restart;
    std::string subject;
    bool operator<(const PairKey& o) const {
        return std::tie(subset, restart, subject) < std::tie(o.subset, o.restart, o.subject);
    }
};

using DiceByKey = std::map<PairKey, double>;

// structure -> pairing key -> dice, non-failed runs only
std::map<std::string, DiceByKey> collect(const std::vector<RunResult>& results,
                                         const std::string& method, int n_labelled) {
    std::map<std::string, DiceByKey> out;
    for (const auto& r : results) {
        if (r.method_id != method || r.n_labelled != n_labelled) continue;
        if (r.failed) {
            std::cerr << "[summarize] excluding failed run " << r.method_id << " nl"
                      << r.n_labelled << " s" << r.subset_index << " r" << r.restart_index << ": "
                      << r.error << "\n";
            continue;
        }
        for (const auto& [structure, values] : r.dice)
            for (const auto& [subject, d] : values)
                out[structure][PairKey{r.subset_index, r.restart_index, subject}] = d;
    }
    return out;
}

}  // namespace

std::vector<MethodSummary> summarize(
    const std::vector<RunResult>& results,
    const std::vector<std::pair<std::string, std::string>>& baseline_pairs) {
    // Preserve first-seen method order.
    std::vector<std::pair<std::string, int>> keys;
    for (const auto& r : results) {
        const auto key = std::make_pair(r.method_id, r.n_labelled);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }

    std::vector<MethodSummary> summaries;
    for (const auto& [method, nl] : keys) {
        MethodSummary s;
        s.method_id = method;
        s.n_labelled = nl;
        const auto data = collect(results, method, nl);
        for (const auto& r : results)
            if (r.method_id == method && r.n_labelled == nl && !r.failed) ++s.n_runs;
        for (const auto& [structure, by_key] : data) {
            double total = 0.0;
            for (const auto& [key, d] : by_key) total += d;
            s.mean_dice[structure] = by_key.empty() ? 0.0 : total / static_cast<double>(by_key.size());
        }
        for (const auto& [m, baseline] : baseline_pairs) {
            if (m != method) continue;
            const auto base_data = collect(results, baseline, nl);
            Comparison cmp;
            cmp.baseline = baseline;
            for (const auto& [structure, by_key] : data) {
                auto bit = base_data.find(structure);
                if (bit == base_data.end()) continue;
                const DiceByKey& base_by_key = bit->second;
                if (by_key.size() != base_by_key.size())
                    throw UnpairedRuns(method + " vs " + baseline + ": run sets differ");
                std::vector<double> a, b;
                for (const auto& [key, d] : by_key) {
                    auto kit = base_by_key.find(key);
                    if (kit == base_by_key.end())
                        throw UnpairedRuns(method + " vs " + baseline + ": key mismatch for " +
                                           key.subject);
                    a.push_back(d);
                    b.push_back(kit->second);
                }
                const auto res = wilcoxon_signed_rank(a, b);
                cmp.p_values[structure] = res.p_value;
                cmp.significant[structure] = res.p_value < 0.05;
            }
            s.comparisons.push_back(std::move(cmp));
        }
        summaries.push_back(std::move(s));
    }
    return summaries;
}

// ---------------------------------------------------------------------------
// Tables

namespace {

std::string fmt3(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << v;
    return os.str();
}

}  // namespace

void emit_report(const std::vector<MethodSummary>& summaries, const std::string& out_dir) {
    if (summaries.empty()) throw std::invalid_argument("emit_report needs nonempty summaries");
    fs::create_directories(out_dir);

    // Pivot (method) x (n_labelled, structure).
    std::vector<std::string> methods;
    std::vector<int> nls;
    for (const auto& s : summaries) {
        if (std::find(methods.begin(), methods.end(), s.method_id) == methods.end())
            methods.push_back(s.method_id);
        if (std::find(nls.begin(), nls.end(), s.n_labelled) == nls.end())
            nls.push_back(s.n_labelled);
    }
    std::sort(nls.begin(), nls.end());

    auto find_summary = [&](const std::string& m, int nl) -> const MethodSummary* {
        for (const auto& s : summaries)
            if (s.method_id == m && s.n_labelled == nl) return &s;
        return nullptr;
    };

    {
        std::ofstream csv(fs::path(out_dir) / "table.csv");
        if (!csv) throw IoError("cannot write table.csv");
        csv << "method";
        for (int nl : nls)
            for (const char* st : kStructures) {
                std::string col(st);
                std::transform(col.begin(), col.end(), col.begin(), ::tolower);
                csv << "," << col << "_" << nl;
            }
        csv << "\n";
        for (const auto& m : methods) {
            csv << m;
            for (int nl : nls) {
                const MethodSummary* s = find_summary(m, nl);
                for (const char* st : kStructures) {
                    csv << ",";
                    if (s && s->mean_dice.count(st)) csv << fmt3(s->mean_dice.at(st));
                }
            }
            csv << "\n";
        }
    }

    {
        std::ofstream txt(fs::path(out_dir) / "table.txt");
        size_t name_w = 8;
        for (const auto& m : methods) name_w = std::max(name_w, m.size());
        txt << std::left << std::setw(static_cast<int>(name_w) + 2) << "method";
        for (int nl : nls)
            for (const char* st : kStructures)
                txt << std::right << std::setw(10) << (std::string(st) + "@" + std::to_string(nl));
        txt << "\n";
        for (const auto& m : methods) {
            txt << std::left << std::setw(static_cast<int>(name_w) + 2) << m;
            for (int nl : nls) {
                const MethodSummary* s = find_summary(m, nl);
                for (const char* st : kStructures) {
                    std::string cell = "-";
                    if (s && s->mean_dice.count(st)) {
                        cell = fmt3(s->mean_dice.at(st));
                        for (const auto& cmp : s->comparisons)
                            if (cmp.significant.count(st) && cmp.significant.at(st)) cell += "*";
                    }
                    txt << std::right << std::setw(10) << cell;
                }
            }
            txt << "\n";
        }
        txt << "\n* = p < 0.05 (two-sided Wilcoxon signed-rank vs designated baseline)\n";
    }

    {
        std::ofstream sig(fs::path(out_dir) / "significance.csv");
        sig << "method,n_labelled,baseline,structure,p_value,significant\n";
        for (const auto& s : summaries)
            for (const auto& cmp : s.comparisons)
                for (const auto& [structure, p] : cmp.p_values)
                    sig << s.method_id << "," << s.n_labelled << "," << cmp.baseline << ","
                        << structure << "," << p << "," << (cmp.significant.at(structure) ? 1 : 0)
                        << "\n";
    }
}

void emit_dice_csv(const std::vector<RunResult>& results, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    os << "method,n_labelled,subset,restart,subject,structure,dice\n";
    for (const auto& r : results) {
        if (r.failed) continue;
        for (const auto& [structure, values] : r.dice)
            for (const auto& [subject, d] : values)
                os << r.method_id << "," << r.n_labelled << "," << r.subset_index << ","
                   << r.restart_index << "," << subject << "," << structure << "," << fmt3(d)
                   << "\n";
    }
}

std::vector<ReferenceRow> load_reference_table(const std::string& csv_path) {
    std::ifstream is(csv_path);
    if (!is) throw IoError("cannot read reference table " + csv_path);
    std::vector<ReferenceRow> rows;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;  // header
            continue;
        }
        std::istringstream ls(line);
        ReferenceRow row;
        std::string tok;
        std::getline(ls, row.method, ',');
        for (int i = 0; i < 6; ++i) {
            if (!std::getline(ls, tok, ',')) throw IoError("short reference row: " + line);
            row.values[static_cast<size_t>(i)] = std::stod(tok);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Figures

void write_pgm(const Tensor& image_hw, const std::string& path) {
    const int h = image_hw.dim(0), w = image_hw.dim(1);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    os << "P5\n" << w << " " << h << "\n255\n";
    for (std::int64_t i = 0; i < image_hw.size(); ++i) {
        const float v = std::clamp(image_hw[i], 0.0f, 1.0f);
        os.put(static_cast<char>(std::lround(v * 255.0f)));
    }
}

void write_ppm(const std::vector<std::uint8_t>& rgb, int h, int w, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    os << "P6\n" << w << " " << h << "\n255\n";
    os.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
}

namespace {

// label colors: RV red, Myo green, LV blue over the grayscale image
void blend_overlay(const Tensor& image, const data::LabelVolume& labels, int z, int x_offset,
                   std::vector<std::uint8_t>& rgb, int panel_w) {
    const int h = labels.height, w = labels.width;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float g = std::clamp(image.at(z, y, x), 0.0f, 1.0f);
            std::uint8_t r8 = static_cast<std::uint8_t>(std::lround(g * 255));
            std::uint8_t g8 = r8, b8 = r8;
            switch (labels.at(z, y, x)) {
                case data::kRV: r8 = static_cast<std::uint8_t>(std::min(255, r8 / 2 + 160)); break;
                case data::kMyo: g8 = static_cast<std::uint8_t>(std::min(255, g8 / 2 + 160)); break;
                case data::kLV: b8 = static_cast<std::uint8_t>(std::min(255, b8 / 2 + 160)); break;
                default: break;
            }
            const size_t o = (static_cast<size_t>(y) * panel_w + x_offset + x) * 3;
            rgb[o] = r8;
            rgb[o + 1] = g8;
            rgb[o + 2] = b8;
        }
}

}  // namespace

void emit_qualitative_panel(const data::VolumeRecord& rec, int slice,
                            const std::vector<std::pair<std::string, seg::SegmentationNetwork*>>&
                                methods,
                            const std::string& out_path) {
    const int h = rec.height(), w = rec.width();
    const int columns = 2 + static_cast<int>(methods.size());
    const int panel_w = columns * w;
    std::vector<std::uint8_t> rgb(static_cast<size_t>(h) * panel_w * 3, 0);

    // column 0: raw input
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float g = std::clamp(rec.image.at(slice, y, x), 0.0f, 1.0f);
            const auto v = static_cast<std::uint8_t>(std::lround(g * 255));
            const size_t o = (static_cast<size_t>(y) * panel_w + x) * 3;
            rgb[o] = rgb[o + 1] = rgb[o + 2] = v;
        }
    // column 1: ground truth overlay
    blend_overlay(rec.image, rec.labels, slice, w, rgb, panel_w);
    // one column per method prediction
    for (size_t m = 0; m < methods.size(); ++m) {
        const auto pred = train::predict_volume(*methods[m].second, rec);
        blend_overlay(rec.image, pred, slice, static_cast<int>(2 + m) * w, rgb, panel_w);
    }
    write_ppm(rgb, h, panel_w, out_path);
}

void emit_generator_sheet(gan::GeneratorNetwork& gen, const data::VolumeRecord& rec, int slice,
                          int n_samples, std::uint64_t seed, const std::string& out_path) {
    const int h = rec.height(), w = rec.width();
    Tensor sheet({h, (1 + n_samples) * w});
    Tensor image({h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            image.at(y, x) = rec.image.at(slice, y, x);
            sheet.at(y, x) = rec.image.at(slice, y, x);
        }
    Tensor labels = data::one_hot_slice(rec.labels, slice);
    Rng rng(seed);
    for (int s = 0; s < n_samples; ++s) {
        Tensor z = gan::sample_z(1, gen.z_dim(), rng);
        const auto [gen_img, gen_lbl] = gan::synthesize_pair(gen, image, labels, z);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) sheet.at(y, (1 + s) * w + x) = gen_img.at(y, x);
    }
    write_pgm(sheet, out_path);
}

}  // namespace taskaug::xp
