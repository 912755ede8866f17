#pragma once

#include "taskaug/data/volume.hpp"

namespace taskaug::seg {

// 2|P n G| / (|P| + |G|) over a whole subject volume; both-empty counts as
// perfect agreement (1.0).
double dice_score(const data::LabelVolume& pred, const data::LabelVolume& gt, int structure);

// Mean over the three foreground structures.
double mean_foreground_dice(const data::LabelVolume& pred, const data::LabelVolume& gt);

}  // namespace taskaug::seg
