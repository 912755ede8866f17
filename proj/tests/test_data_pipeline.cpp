#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <set>

#include "helpers.hpp"
#include "taskaug/core/errors.hpp"
#include "taskaug/data/pipeline.hpp"
#include "taskaug/data/slice_batch.hpp"
#include "taskaug/data/splits.hpp"
#include "taskaug/data/synthetic.hpp"
#include "taskaug/data/volume_io.hpp"
#include "taskaug/seg/dice.hpp"

using namespace taskaug;
using testutil::random_tensor;

namespace {

// independent oracle: full sort + linear-interpolation percentile formula
double percentile_oracle(std::vector<float> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q / 100.0 * (static_cast<double>(v.size()) - 1.0);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, v.size() - 1);
    const double f = pos - static_cast<double>(lo);
    return (1 - f) * v[lo] + f * v[hi];
}

}  // namespace

TEST_CASE("normalize_volume on a linear ramp maps the 98th percentile to 1") {
    Tensor vol({101, 1, 1});
    for (int i = 0; i <= 100; ++i) vol[i] = static_cast<float>(i);
    Tensor out = data::normalize_volume(vol);
    // with values 0..100, x2 = 2 and x98 = 98
    CHECK(out[98] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(out[2] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(out[100] > 1.0f);  // values beyond the 98th percentile exceed 1
}

TEST_CASE("normalize_volume rejects constant volumes") {
    CHECK_THROWS_AS(data::normalize_volume(Tensor({4, 4, 4}, 5.0f)), DegenerateVolume);
}

TEST_CASE("normalize_volume matches the brute-force percentile oracle") {
    Tensor vol = random_tensor({4, 16, 16}, 77, -3.0f, 11.0f);
    std::vector<float> v(vol.data(), vol.data() + vol.size());
    const double x2 = percentile_oracle(v, 2.0);
    const double x98 = percentile_oracle(v, 98.0);
    Tensor out = data::normalize_volume(vol);
    for (std::int64_t i = 0; i < vol.size(); ++i)
        CHECK(out[i] == doctest::Approx((vol[i] - x2) / (x98 - x2)).epsilon(1e-6));
}

TEST_CASE("normalization is invariant to affine intensity rescaling") {
    Tensor vol = random_tensor({3, 12, 12}, 78, 0.0f, 2.0f);
    Tensor scaled(vol.shape());
    for (std::int64_t i = 0; i < vol.size(); ++i) scaled[i] = 3.7f * vol[i] - 12.0f;
    Tensor a = data::normalize_volume(vol);
    Tensor b = data::normalize_volume(scaled);
    for (std::int64_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-6f);
}

TEST_CASE("resample_slice identity case returns inputs unchanged") {
    Tensor img = random_tensor({224, 224}, 79);
    Tensor lbl({224, 224});
    auto [ri, rl] = data::resample_slice(img, lbl, {data::kTargetSpacingMm, data::kTargetSpacingMm});
    CHECK(std::memcmp(ri.data(), img.data(), sizeof(float) * 224 * 224) == 0);
    CHECK(std::memcmp(rl.data(), lbl.data(), sizeof(float) * 224 * 224) == 0);
}

TEST_CASE("resample_slice doubles a 2.734mm slice and pads to 224") {
    Tensor img = random_tensor({100, 100}, 80, 0.0f, 1.0f);
    Tensor lbl({100, 100});
    for (int y = 40; y < 60; ++y)
        for (int x = 40; x < 60; ++x) lbl.at(y, x) = 2.0f;
    auto [ri, rl] = data::resample_slice(img, lbl, {2.734, 2.734});
    CHECK(ri.shape() == std::vector<int>({224, 224}));
    CHECK(rl.shape() == std::vector<int>({224, 224}));

    // label values stay in {0..3}
    std::set<float> vals(rl.data(), rl.data() + rl.size());
    for (float v : vals) CHECK((v == 0.0f || v == 2.0f));

    // independent resize oracle at the scaled size (200x200), then centered
    const int scaled = 200, pad = (224 - scaled) / 2;
    for (int y = 0; y < scaled; ++y)
        for (int x = 0; x < scaled; ++x) {
            const double sy = std::clamp((y + 0.5) * 100.0 / scaled - 0.5, 0.0, 99.0);
            const double sx = std::clamp((x + 0.5) * 100.0 / scaled - 0.5, 0.0, 99.0);
            const int y0 = std::min(static_cast<int>(sy), 98), x0 = std::min(static_cast<int>(sx), 98);
            const double fy = sy - y0, fx = sx - x0;
            const double expect =
                (1 - fy) * ((1 - fx) * img.at(y0, x0) + fx * img.at(y0, x0 + 1)) +
                fy * ((1 - fx) * img.at(y0 + 1, x0) + fx * img.at(y0 + 1, x0 + 1));
            CHECK(ri.at(y + pad, x + pad) == doctest::Approx(expect).epsilon(1e-4));
        }
    // padded border is zero
    CHECK(ri.at(0, 0) == 0.0f);
    CHECK(rl.at(0, 0) == 0.0f);
}

TEST_CASE("resample of an all-background label slice stays background") {
    Tensor img = random_tensor({50, 60}, 81);
    Tensor lbl({50, 60});
    auto [ri, rl] = data::resample_slice(img, lbl, {2.0, 2.0});
    for (std::int64_t i = 0; i < rl.size(); ++i) CHECK(rl[i] == 0.0f);
}

TEST_CASE("one-hot after resample sums to exactly 1") {
    auto records = data::make_synthetic_dataset(12, 5, 32, 4);
    data::LabelVolume& labels = records[0].labels;
    Tensor oh = data::one_hot_slice(labels, 2);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            float s = 0;
            for (int c = 0; c < 4; ++c) s += oh.at(y, x, c);
            CHECK(s == 1.0f);
        }
}

TEST_CASE("make_split produces balanced disjoint role sets deterministically") {
    auto records = data::make_synthetic_dataset(60, 1, 32, 4);
    auto split = data::make_split(records, 42);
    CHECK(split.test_ids.size() == 20);
    CHECK(split.val_ids.size() == 2);
    CHECK(split.labelled_pool_ids.size() == 10);
    CHECK(split.unlabelled_ids.size() == 25);

    std::set<std::string> all;
    for (const auto* list :
         {&split.test_ids, &split.val_ids, &split.labelled_pool_ids, &split.unlabelled_ids})
        for (const auto& id : *list) CHECK(all.insert(id).second);  // disjoint

    std::map<std::string, std::string> group_of;
    for (const auto& r : records) group_of[r.subject_id] = r.group;
    std::map<std::string, int> test_per_group, unlab_per_group, pool_per_group;
    for (const auto& id : split.test_ids) ++test_per_group[group_of[id]];
    for (const auto& id : split.unlabelled_ids) ++unlab_per_group[group_of[id]];
    for (const auto& id : split.labelled_pool_ids) ++pool_per_group[group_of[id]];
    for (const auto& [g, n] : test_per_group) CHECK(n == 4);
    for (const auto& [g, n] : unlab_per_group) CHECK(n == 5);
    for (const auto& [g, n] : pool_per_group) CHECK(n == 2);

    auto split2 = data::make_split(records, 42);
    CHECK(split.test_ids == split2.test_ids);
    CHECK(split.val_ids == split2.val_ids);
    CHECK(split.labelled_pool_ids == split2.labelled_pool_ids);
    CHECK(split.unlabelled_ids == split2.unlabelled_ids);

    auto split3 = data::make_split(records, 43);
    CHECK(split.test_ids != split3.test_ids);
}

TEST_CASE("make_split rejects underfilled groups") {
    auto records = data::make_synthetic_dataset(30, 1, 32, 4);  // 6 per group < 11
    CHECK_THROWS_AS(data::make_split(records, 0), InsufficientSubjects);
}

TEST_CASE("sample_labelled_subset honours counts, groups, and determinism") {
    auto records = data::make_synthetic_dataset(60, 1, 32, 4);
    auto split = data::make_split(records, 7);
    std::vector<std::pair<std::string, std::string>> id_group;
    for (const auto& r : records) id_group.emplace_back(r.subject_id, r.group);
    std::map<std::string, std::string> group_of(id_group.begin(), id_group.end());

    for (int run = 0; run < 5; ++run) {
        auto one = data::sample_labelled_subset(split, id_group, 1, run);
        REQUIRE(one.size() == 1);
        CHECK(std::count(split.labelled_pool_ids.begin(), split.labelled_pool_ids.end(), one[0]) ==
              1);

        auto three = data::sample_labelled_subset(split, id_group, 3, run);
        REQUIRE(three.size() == 3);
        std::set<std::string> groups;
        for (const auto& id : three) groups.insert(group_of[id]);
        CHECK(groups.size() == 3);

        CHECK(data::sample_labelled_subset(split, id_group, 3, run) == three);
    }
    CHECK_THROWS(data::sample_labelled_subset(split, id_group, 2, 0));
}

TEST_CASE("synthetic dataset: determinism, class coverage, invariants") {
    auto a = data::make_synthetic_dataset(60, 1, 32, 6);
    auto b = data::make_synthetic_dataset(60, 1, 32, 6);
    REQUIRE(a.size() == 60);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].subject_id == b[i].subject_id);
        CHECK(std::memcmp(a[i].image.data(), b[i].image.data(),
                          sizeof(float) * static_cast<size_t>(a[i].image.size())) == 0);
        CHECK(a[i].labels.values == b[i].labels.values);
        CHECK_NOTHROW(data::validate_record(a[i]));
    }

    int with_all_classes = 0;
    for (const auto& rec : a) {
        const int z = rec.depth() / 2;
        std::set<int> classes;
        for (int y = 0; y < rec.height(); ++y)
            for (int x = 0; x < rec.width(); ++x) classes.insert(rec.labels.at(z, y, x));
        if (classes.size() == 4) ++with_all_classes;
    }
    CHECK(with_all_classes >= 54);  // >= 90% of center slices

    CHECK_THROWS(data::make_synthetic_dataset(11, 1, 32, 6));
}

TEST_CASE("synthetic labels equal an independent rasterization of the shape specs") {
    const auto specs = data::synthetic_phantom_specs(12, 3, 32, 5);
    const auto records = data::make_synthetic_dataset(12, 3, 32, 5);
    for (size_t i = 0; i < specs.size(); ++i) {
        const data::LabelVolume expect = data::render_phantom_labels(specs[i], 32, 5);
        data::LabelVolume pred = records[i].labels;
        for (int structure : {data::kRV, data::kMyo, data::kLV})
            CHECK(seg::dice_score(pred, expect, structure) == 1.0);
        CHECK(pred.values == expect.values);
    }
}

TEST_CASE("volume container and split files round-trip") {
    namespace fs = std::filesystem;
    auto records = data::make_synthetic_dataset(12, 9, 32, 4);
    const auto dir = fs::temp_directory_path() / "taskaug_volio_test";
    fs::remove_all(dir);
    data::save_volume_dir(records, dir.string());
    auto loaded = data::load_volume_dir(dir.string());
    REQUIRE(loaded.size() == records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].subject_id == records[i].subject_id);
        CHECK(loaded[i].group == records[i].group);
        CHECK(loaded[i].in_plane_spacing == records[i].in_plane_spacing);
        CHECK(std::memcmp(loaded[i].image.data(), records[i].image.data(),
                          sizeof(float) * static_cast<size_t>(records[i].image.size())) == 0);
        CHECK(loaded[i].labels.values == records[i].labels.values);
    }

    auto split = data::make_split(data::make_synthetic_dataset(60, 1, 32, 4), 3);
    const auto split_path = (dir / "split.txt").string();
    data::save_split(split, split_path);
    auto split2 = data::load_split(split_path);
    CHECK(split2.rng_seed == split.rng_seed);
    CHECK(split2.test_ids == split.test_ids);
    CHECK(split2.val_ids == split.val_ids);
    CHECK(split2.labelled_pool_ids == split.labelled_pool_ids);
    CHECK(split2.unlabelled_ids == split.unlabelled_ids);
    fs::remove_all(dir);
}

TEST_CASE("minimal NIfTI writer/reader round-trips volume and spacing") {
    namespace fs = std::filesystem;
    Tensor vol = random_tensor({3, 10, 12}, 91);
    const auto path = (fs::temp_directory_path() / "taskaug_nifti_test.nii").string();
    data::write_nifti(vol, {1.5, 1.25, 8.0}, path);
    std::array<double, 3> spacing{};
    Tensor back = data::read_nifti(path, spacing);
    CHECK(back.shape() == vol.shape());
    CHECK(std::memcmp(back.data(), vol.data(), sizeof(float) * static_cast<size_t>(vol.size())) ==
          0);
    CHECK(spacing[0] == doctest::Approx(1.5));
    CHECK(spacing[1] == doctest::Approx(1.25));
    CHECK(spacing[2] == doctest::Approx(8.0));
    fs::remove(path);
}

TEST_CASE("NIfTI directory ingestion pairs images, labels, and groups") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "taskaug_ingest_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    auto records = data::make_synthetic_dataset(12, 19, 32, 4);
    std::ofstream groups(dir / "groups.txt");
    for (int i = 0; i < 3; ++i) {
        const auto& rec = records[static_cast<size_t>(i)];
        groups << rec.subject_id << " " << rec.group << "\n";
        data::write_nifti(rec.image, {1.5, 1.5, 8.0},
                          (dir / (rec.subject_id + "_ES_image.nii")).string());
        Tensor lbl({rec.depth(), rec.height(), rec.width()});
        for (std::int64_t k = 0; k < lbl.size(); ++k)
            lbl[k] = static_cast<float>(rec.labels.values[static_cast<size_t>(k)]);
        data::write_nifti(lbl, {1.5, 1.5, 8.0},
                          (dir / (rec.subject_id + "_ES_label.nii")).string());
    }
    groups.close();

    auto ingested = data::ingest_nifti_dir(dir.string(), "ES");
    REQUIRE(ingested.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(ingested[static_cast<size_t>(i)].subject_id == records[static_cast<size_t>(i)].subject_id);
        CHECK(ingested[static_cast<size_t>(i)].group == records[static_cast<size_t>(i)].group);
        CHECK(ingested[static_cast<size_t>(i)].labels.values == records[static_cast<size_t>(i)].labels.values);
        CHECK(ingested[static_cast<size_t>(i)].in_plane_spacing[0] == doctest::Approx(1.5));
        CHECK(ingested[static_cast<size_t>(i)].slice_thickness == doctest::Approx(8.0));
    }

    // a different phase selector finds nothing
    CHECK_THROWS(data::ingest_nifti_dir(dir.string(), "ED"));
    fs::remove_all(dir);
}

TEST_CASE("preprocess_record normalizes and reshapes to the target grid") {
    auto records = data::make_synthetic_dataset(12, 13, 32, 4);
    data::VolumeRecord raw = records[0];
    raw.in_plane_spacing = {2.734, 2.734};
    data::VolumeRecord pre = data::preprocess_record(raw, 1.367, 64);
    CHECK(pre.height() == 64);
    CHECK(pre.width() == 64);
    CHECK(pre.depth() == raw.depth());
    CHECK_NOTHROW(data::validate_record(pre));
}
