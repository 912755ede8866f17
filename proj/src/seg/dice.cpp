#include "taskaug/seg/dice.hpp"

#include "taskaug/core/errors.hpp"

namespace taskaug::seg {

double dice_score(const data::LabelVolume& pred, const data::LabelVolume& gt, int structure) {
    if (pred.depth != gt.depth || pred.height != gt.height || pred.width != gt.width)
        throw ShapeMismatch("dice_score volumes differ in shape");
    std::int64_t inter = 0, np = 0, ng = 0;
    for (size_t i = 0; i < pred.values.size(); ++i) {
        const bool p = pred.values[i] == structure;
        const bool g = gt.values[i] == structure;
        inter += p && g;
        np += p;
        ng += g;
    }
    if (np + ng == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(np + ng);
}

double mean_foreground_dice(const data::LabelVolume& pred, const data::LabelVolume& gt) {
    double s = 0.0;
    for (int structure : {data::kRV, data::kMyo, data::kLV}) s += dice_score(pred, gt, structure);
    return s / 3.0;
}

}  // namespace taskaug::seg
