#include "taskaug/data/splits.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "taskaug/core/errors.hpp"
#include "taskaug/core/rng.hpp"

namespace taskaug::data {

namespace {

constexpr int kTestPerGroup = 4;
constexpr int kUnlabelledPerGroup = 5;
constexpr int kPoolPerGroup = 2;
constexpr int kValTotal = 2;

}  // namespace

DatasetSplit make_split_from_groups(
    const std::vector<std::pair<std::string, std::string>>& id_group, std::uint64_t seed) {
    std::map<std::string, std::vector<std::string>> by_group;
    for (const auto& [id, group] : id_group) by_group[group].push_back(id);

    const int quota = kTestPerGroup + kUnlabelledPerGroup + kPoolPerGroup;
    for (auto& [group, ids] : by_group) {
        if (static_cast<int>(ids.size()) < quota)
            throw InsufficientSubjects("group '" + group + "' has " + std::to_string(ids.size()) +
                                       " subjects, needs " + std::to_string(quota));
        std::sort(ids.begin(), ids.end());
    }

    DatasetSplit split;
    split.rng_seed = seed;
    std::vector<std::string> leftover;
    int group_index = 0;
    for (auto& [group, ids] : by_group) {
        Rng rng(derive_seed(seed, 0x5eed, static_cast<std::uint64_t>(group_index)));
        std::shuffle(ids.begin(), ids.end(), rng);
        int k = 0;
        for (int i = 0; i < kTestPerGroup; ++i) split.test_ids.push_back(ids[k++]);
        for (int i = 0; i < kUnlabelledPerGroup; ++i) split.unlabelled_ids.push_back(ids[k++]);
        for (int i = 0; i < kPoolPerGroup; ++i) split.labelled_pool_ids.push_back(ids[k++]);
        for (; k < static_cast<int>(ids.size()); ++k) leftover.push_back(ids[k]);
        ++group_index;
    }
    if (static_cast<int>(leftover.size()) < kValTotal)
        throw InsufficientSubjects("no subjects left for the validation set");
    std::sort(leftover.begin(), leftover.end());
    Rng rng(derive_seed(seed, 0x7a1));
    std::shuffle(leftover.begin(), leftover.end(), rng);
    split.val_ids.assign(leftover.begin(), leftover.begin() + kValTotal);

    std::sort(split.test_ids.begin(), split.test_ids.end());
    std::sort(split.unlabelled_ids.begin(), split.unlabelled_ids.end());
    std::sort(split.labelled_pool_ids.begin(), split.labelled_pool_ids.end());
    std::sort(split.val_ids.begin(), split.val_ids.end());
    return split;
}

DatasetSplit make_split(const std::vector<VolumeRecord>& subjects, std::uint64_t seed) {
    std::vector<std::pair<std::string, std::string>> id_group;
    id_group.reserve(subjects.size());
    for (const auto& s : subjects) id_group.emplace_back(s.subject_id, s.group);
    return make_split_from_groups(id_group, seed);
}

std::vector<std::string> sample_labelled_subset(
    const DatasetSplit& split, const std::vector<std::pair<std::string, std::string>>& id_group,
    int n_labelled, int run_index) {
    if (n_labelled != 1 && n_labelled != 3)
        throw std::invalid_argument("n_labelled must be 1 or 3");
    std::map<std::string, std::string> group_of;
    for (const auto& [id, g] : id_group) group_of[id] = g;

    Rng rng(derive_seed(split.rng_seed, 0x1abe1, static_cast<std::uint64_t>(run_index)));
    std::vector<std::string> pool = split.labelled_pool_ids;  // sorted by construction
    std::shuffle(pool.begin(), pool.end(), rng);

    if (n_labelled == 1) return {pool.front()};

    // Walk the shuffled pool taking the first subject of each unseen group.
    std::vector<std::string> out;
    std::set<std::string> used_groups;
    for (const auto& id : pool) {
        const std::string& g = group_of.at(id);
        if (used_groups.count(g)) continue;
        used_groups.insert(g);
        out.push_back(id);
        if (static_cast<int>(out.size()) == n_labelled) break;
    }
    if (static_cast<int>(out.size()) < n_labelled)
        throw InsufficientSubjects("labelled pool spans fewer groups than n_labelled");
    return out;
}

namespace {

void write_role(std::ostream& os, const char* role, const std::vector<std::string>& ids) {
    os << role << ":";
    for (const auto& id : ids) os << " " << id;
    os << "\n";
}

}  // namespace

void save_split(const DatasetSplit& split, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write split file " + path);
    os << "seed: " << split.rng_seed << "\n";
    write_role(os, "test", split.test_ids);
    write_role(os, "val", split.val_ids);
    write_role(os, "labelled_pool", split.labelled_pool_ids);
    write_role(os, "unlabelled", split.unlabelled_ids);
}

DatasetSplit load_split(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read split file " + path);
    DatasetSplit split;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "seed:") {
            ls >> split.rng_seed;
            continue;
        }
        std::vector<std::string>* target = nullptr;
        if (key == "test:") target = &split.test_ids;
        else if (key == "val:") target = &split.val_ids;
        else if (key == "labelled_pool:") target = &split.labelled_pool_ids;
        else if (key == "unlabelled:") target = &split.unlabelled_ids;
        if (!target) continue;
        std::string id;
        while (ls >> id) target->push_back(id);
    }
    return split;
}

}  // namespace taskaug::data
