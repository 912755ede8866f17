#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "taskaug/data/volume.hpp"

namespace taskaug::data {

// Per-group quotas: 4 test + 5 unlabelled + 2 labelled-pool subjects from
// each of the 5 groups; 2 validation subjects drawn from the remainder.
struct DatasetSplit {
    std::vector<std::string> test_ids;           // 20
    std::vector<std::string> val_ids;            // 2
    std::vector<std::string> labelled_pool_ids;  // 10
    std::vector<std::string> unlabelled_ids;     // 25
    std::uint64_t rng_seed = 0;
};

// Deterministic for a given seed. Throws InsufficientSubjects when any group
// cannot fill its 4+5+2 quota or no subjects remain for validation.
DatasetSplit make_split(const std::vector<VolumeRecord>& subjects, std::uint64_t seed);

// Group tags needed to enforce the distinct-groups rule for n_labelled = 3.
DatasetSplit make_split_from_groups(const std::vector<std::pair<std::string, std::string>>& id_group,
                                    std::uint64_t seed);

// Picks the labelled training subjects for one run. Deterministic per
// (split.rng_seed, run_index); for n_labelled = 3 the subjects come from
// three distinct groups.
std::vector<std::string> sample_labelled_subset(
    const DatasetSplit& split, const std::vector<std::pair<std::string, std::string>>& id_group,
    int n_labelled, int run_index);

void save_split(const DatasetSplit& split, const std::string& path);
DatasetSplit load_split(const std::string& path);

}  // namespace taskaug::data
