#include "taskaug/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "taskaug/aug/classic.hpp"
#include "taskaug/core/errors.hpp"
#include "taskaug/nn/adam.hpp"
#include "taskaug/seg/dice.hpp"
#include "taskaug/seg/losses.hpp"

namespace taskaug::train {

using data::SliceBatch;
using gan::GeneratorKind;
using nn::Mode;

// ---------------------------------------------------------------------------
// Modes

AugMode aug_mode_from_name(const std::string& name) {
    if (name == "none") return AugMode::None;
    if (name == "affine") return AugMode::Affine;
    if (name == "elastic") return AugMode::Elastic;
    if (name == "intensity") return AugMode::Intensity;
    if (name == "gd") return AugMode::GD;
    if (name == "gi") return AugMode::GI;
    if (name == "gd+gi") return AugMode::GDGI;
    if (name == "mixup") return AugMode::Mixup;
    if (name == "gd+gi+mixup") return AugMode::GDGIMixup;
    throw std::invalid_argument("unknown aug mode: " + name);
}

const char* aug_mode_name(AugMode mode) {
    switch (mode) {
        case AugMode::None: return "none";
        case AugMode::Affine: return "affine";
        case AugMode::Elastic: return "elastic";
        case AugMode::Intensity: return "intensity";
        case AugMode::GD: return "gd";
        case AugMode::GI: return "gi";
        case AugMode::GDGI: return "gd+gi";
        case AugMode::Mixup: return "mixup";
        case AugMode::GDGIMixup: return "gd+gi+mixup";
    }
    return "?";
}

bool aug_mode_needs_gd(AugMode mode) {
    return mode == AugMode::GD || mode == AugMode::GDGI || mode == AugMode::GDGIMixup;
}
bool aug_mode_needs_gi(AugMode mode) {
    return mode == AugMode::GI || mode == AugMode::GDGI || mode == AugMode::GDGIMixup;
}

// ---------------------------------------------------------------------------
// Streams & sampling

Phase1Streams make_phase1_streams(const TrainConfig& cfg) {
    Phase1Streams s{Rng(derive_seed(cfg.seed, 0x0da7a, 1)), Rng(derive_seed(cfg.seed, 0x002e, 1)),
                    derive_seed(cfg.seed, 0x15e6, 1), derive_seed(cfg.seed, 0x16e4, 1),
                    derive_seed(cfg.seed, 0x1d15, 1)};
    return s;
}

Phase2Streams make_phase2_streams(const TrainConfig& cfg) {
    Phase2Streams s{Rng(derive_seed(cfg.seed, 0x0da7a, 2)), Rng(derive_seed(cfg.seed, 0x0a06, 2)),
                    Rng(derive_seed(cfg.seed, 0x002e, 2)), derive_seed(cfg.seed, 0x15e6, 2)};
    return s;
}

std::vector<int> draw_indices(int pool_size, int count, Rng& rng) {
    std::uniform_int_distribution<int> dist(0, pool_size - 1);
    std::vector<int> out(static_cast<size_t>(count));
    for (int& v : out) v = dist(rng);
    return out;
}

SliceBatch sample_real_batch(const data::SlicePool& pool, int count, Rng& rng) {
    if (pool.size() == 0) throw EmptySplit("cannot sample from an empty slice pool");
    return gather_batch(pool, draw_indices(pool.size(), count, rng));
}

// ---------------------------------------------------------------------------
// Batch utilities

namespace {

Tensor nth(const Tensor& batch, int i) {
    const std::int64_t n = batch.size() / batch.dim(0);
    Tensor out(std::vector<int>(batch.shape().begin() + 1, batch.shape().end()));
    std::copy(batch.data() + i * n, batch.data() + (i + 1) * n, out.data());
    return out;
}

void set_nth(Tensor& batch, int i, const Tensor& value) {
    const std::int64_t n = batch.size() / batch.dim(0);
    std::copy(value.data(), value.data() + n, batch.data() + i * n);
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
    std::vector<int> shape = a.shape();
    shape[0] = a.dim(0) + b.dim(0);
    Tensor out(shape);
    std::copy(a.data(), a.data() + a.size(), out.data());
    std::copy(b.data(), b.data() + b.size(), out.data() + a.size());
    return out;
}

Tensor rows(const Tensor& t, int start, int count) {
    std::vector<int> shape = t.shape();
    shape[0] = count;
    Tensor out(shape);
    const std::int64_t n = t.size() / t.dim(0);
    std::copy(t.data() + start * n, t.data() + (start + count) * n, out.data());
    return out;
}

SliceBatch concat_batches(const SliceBatch& a, const SliceBatch& b) {
    SliceBatch out;
    out.images = concat_rows(a.images, b.images);
    out.labels = concat_rows(a.labels, b.labels);
    out.provenance = a.provenance;
    out.provenance.insert(out.provenance.end(), b.provenance.begin(), b.provenance.end());
    return out;
}

SliceBatch take_rows(const SliceBatch& b, int start, int count) {
    SliceBatch out;
    out.images = rows(b.images, start, count);
    out.labels = rows(b.labels, start, count);
    out.provenance.assign(b.provenance.begin() + start, b.provenance.begin() + start + count);
    return out;
}

void mark_generated(SliceBatch& b, const char* lineage) {
    for (auto& p : b.provenance) {
        p.generated = true;
        p.lineage = lineage;
    }
}

double max_param_abs(const std::vector<nn::Param*>& params) {
    double m = 0.0;
    for (const nn::Param* p : params) m = std::max(m, max_abs(p->value));
    return m;
}

void ensure_finite(double v, const char* name, int iter, const SliceBatch& batch,
                   const std::vector<nn::Param*>& params) {
    if (std::isfinite(v)) return;
    std::ostringstream os;
    os << name << " became non-finite at iteration " << iter
       << "; max|param| = " << max_param_abs(params) << "; batch slices:";
    for (const auto& p : batch.provenance)
        os << " " << p.subject_id << "#" << p.slice_index << "(" << p.lineage << ")";
    throw NonFiniteLoss(os.str());
}

// Applies generator outputs to source slices: images for the discriminator
// path, or full (image,label) pairs.
Tensor generated_images(GeneratorKind kind, const Tensor& src_images, const Tensor& gen_out) {
    const int n = src_images.dim(0), h = src_images.dim(1), w = src_images.dim(2);
    Tensor out(src_images.shape());
    for (int i = 0; i < n; ++i) {
        Tensor img = nth(src_images, i).reshaped({h, w});
        if (kind == GeneratorKind::Deformation) {
            warp::DeformationField field{nth(gen_out, i)};
            set_nth(out, i, warp::warp_bilinear(img, field));
        } else {
            warp::IntensityMask mask{nth(gen_out, i).reshaped({h, w})};
            set_nth(out, i, warp::apply_intensity(img, mask));
        }
    }
    return out;
}

void synthesize_batch(GeneratorKind kind, const SliceBatch& src, const Tensor& gen_out,
                      Tensor& images_out, Tensor& labels_out) {
    images_out = generated_images(kind, src.images, gen_out);
    if (kind == GeneratorKind::Intensity) {
        labels_out = src.labels;  // bit-identical by contract
        return;
    }
    labels_out = Tensor(src.labels.shape());
    for (int i = 0; i < src.batch(); ++i) {
        warp::DeformationField field{nth(gen_out, i)};
        set_nth(labels_out, i, warp::warp_labels(nth(src.labels, i), field));
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Phase-2 augmentation samples

SliceBatch generate_samples(gan::GeneratorNetwork* gd, gan::GeneratorNetwork* gi, GenChoice which,
                            const SliceBatch& sources, Rng& z_rng) {
    SliceBatch out = sources;
    if (which == GenChoice::V || which == GenChoice::VI) {
        if (!gd) throw std::invalid_argument("deformation generator required");
        Tensor z = gan::sample_z(sources.batch(), gd->z_dim(), z_rng);
        Tensor fields = gd->forward(sources.images, z, Mode::Eval, false);
        synthesize_batch(GeneratorKind::Deformation, out, fields, out.images, out.labels);
    }
    if (which == GenChoice::I || which == GenChoice::VI) {
        if (!gi) throw std::invalid_argument("intensity generator required");
        Tensor z = gan::sample_z(sources.batch(), gi->z_dim(), z_rng);
        Tensor masks = gi->forward(out.images, z, Mode::Eval, false);
        out.images = generated_images(GeneratorKind::Intensity, out.images, masks);
    }
    mark_generated(out, which == GenChoice::V ? "gen:gd"
                                              : (which == GenChoice::I ? "gen:gi" : "gen:gd+gi"));
    return out;
}

namespace {

// One per-slice category draw for the GD+GI pool, optionally with the mixup
// extension categories (original, affine).
SliceBatch generated_mixture(const data::SlicePool& pool, gan::GeneratorNetwork* gd,
                             gan::GeneratorNetwork* gi, int count, bool include_plain,
                             Rng& data_rng, Rng& aug_rng, Rng& z_rng) {
    SliceBatch src = sample_real_batch(pool, count, data_rng);
    const int n_cat = include_plain ? 5 : 3;  // {orig, affine,} V, I, VI
    std::uniform_int_distribution<int> cat_dist(0, n_cat - 1);
    std::vector<int> cat(static_cast<size_t>(count));
    for (int& c : cat) c = cat_dist(aug_rng);

    SliceBatch out = src;
    // Gather indices per category, transform as a sub-batch, scatter back.
    for (int c = 0; c < n_cat; ++c) {
        std::vector<int> idx;
        for (int i = 0; i < count; ++i)
            if (cat[static_cast<size_t>(i)] == c) idx.push_back(i);
        if (idx.empty()) continue;
        SliceBatch sub;
        sub.images = Tensor({static_cast<int>(idx.size()), src.height(), src.width(), 1});
        sub.labels = Tensor({static_cast<int>(idx.size()), src.height(), src.width(), 4});
        sub.provenance.resize(idx.size());
        for (size_t k = 0; k < idx.size(); ++k) {
            set_nth(sub.images, static_cast<int>(k), nth(src.images, idx[k]));
            set_nth(sub.labels, static_cast<int>(k), nth(src.labels, idx[k]));
            sub.provenance[k] = src.provenance[static_cast<size_t>(idx[k])];
        }
        SliceBatch gen;
        const bool plain_cat = include_plain && c < 2;
        if (plain_cat && c == 0) {
            gen = sub;  // original
        } else if (plain_cat && c == 1) {
            gen = aug::affine_augment(sub, aug_rng());
        } else {
            const int gc = include_plain ? c - 2 : c;
            gen = generate_samples(gd, gi, static_cast<GenChoice>(gc), sub, z_rng);
        }
        for (size_t k = 0; k < idx.size(); ++k) {
            set_nth(out.images, idx[k], nth(gen.images, static_cast<int>(k)));
            set_nth(out.labels, idx[k], nth(gen.labels, static_cast<int>(k)));
            out.provenance[static_cast<size_t>(idx[k])] = gen.provenance[k];
        }
    }
    return out;
}

}  // namespace

SliceBatch assemble_phase2_batch(const data::SlicePool& labelled, AugMode mode,
                                 gan::GeneratorNetwork* gd, gan::GeneratorNetwork* gi,
                                 const TrainConfig& cfg, Rng& data_rng, Rng& aug_rng, Rng& z_rng) {
    const int bs = cfg.batch_size;
    if (mode == AugMode::None) return sample_real_batch(labelled, bs, data_rng);
    if (mode == AugMode::Affine) {
        SliceBatch batch = sample_real_batch(labelled, bs, data_rng);
        return cfg.affine_enabled ? aug::affine_augment(batch, aug_rng()) : batch;
    }

    const int n_gen = bs / 2;
    const int n_real = bs - n_gen;
    SliceBatch base = sample_real_batch(labelled, bs, data_rng);
    if (cfg.affine_enabled) base = aug::affine_augment(base, aug_rng());
    SliceBatch real_part = take_rows(base, 0, n_real);

    SliceBatch aug_part;
    switch (mode) {
        case AugMode::Elastic: {
            SliceBatch src = sample_real_batch(labelled, n_gen, data_rng);
            aug_part = aug::random_elastic(src, cfg.elastic_sigma, aug_rng());
            mark_generated(aug_part, "aug:elastic");
            break;
        }
        case AugMode::Intensity: {
            SliceBatch src = sample_real_batch(labelled, n_gen, data_rng);
            aug_part = aug::random_intensity(src, aug_rng(), cfg.intensity_c_lo,
                                             cfg.intensity_c_hi, cfg.intensity_b_lo,
                                             cfg.intensity_b_hi);
            mark_generated(aug_part, "aug:intensity");
            break;
        }
        case AugMode::GD: {
            SliceBatch src = sample_real_batch(labelled, n_gen, data_rng);
            aug_part = generate_samples(gd, nullptr, GenChoice::V, src, z_rng);
            break;
        }
        case AugMode::GI: {
            SliceBatch src = sample_real_batch(labelled, n_gen, data_rng);
            aug_part = generate_samples(nullptr, gi, GenChoice::I, src, z_rng);
            break;
        }
        case AugMode::GDGI: {
            aug_part = generated_mixture(labelled, gd, gi, n_gen, false, data_rng, aug_rng, z_rng);
            break;
        }
        case AugMode::Mixup: {
            SliceBatch a = sample_real_batch(labelled, n_gen, data_rng);
            SliceBatch b = sample_real_batch(labelled, n_gen, data_rng);
            aug_part = aug::mixup(a, b, aug::MixupConfig{cfg.mixup_alpha}, aug_rng());
            break;
        }
        case AugMode::GDGIMixup: {
            SliceBatch a = generated_mixture(labelled, gd, gi, n_gen, true, data_rng, aug_rng,
                                             z_rng);
            SliceBatch b = generated_mixture(labelled, gd, gi, n_gen, true, data_rng, aug_rng,
                                             z_rng);
            aug_part = aug::mixup(a, b, aug::MixupConfig{cfg.mixup_alpha}, aug_rng());
            break;
        }
        default:
            throw std::invalid_argument("unhandled aug mode");
    }
    for (auto& p : aug_part.provenance) p.generated = true;
    return concat_batches(real_part, aug_part);
}

// ---------------------------------------------------------------------------
// Phase 1

Phase1Result train_augmentor_joint(GeneratorKind kind, const TrainData& data,
                                   const TrainConfig& cfg, const TrainHooks& hooks) {
    if (data.labelled_ids.empty()) throw EmptySplit("phase 1 requires labelled subjects");
    if (data.split.unlabelled_ids.empty()) throw EmptySplit("phase 1 requires unlabelled subjects");

    data::SlicePool labelled = build_slice_pool(*data.records, data.labelled_ids);
    std::vector<std::string> real_ids = data.labelled_ids;
    real_ids.insert(real_ids.end(), data.split.unlabelled_ids.begin(),
                    data.split.unlabelled_ids.end());
    data::SlicePool real_pool = build_slice_pool(*data.records, real_ids);

    Phase1Streams streams = make_phase1_streams(cfg);
    seg::SegmentationNetwork s(cfg.unet);
    s.init(streams.seg_init);
    auto g = std::make_shared<gan::GeneratorNetwork>(kind, cfg.grid, cfg.gen, cfg.z_dim);
    g->init(streams.gen_init);
    gan::DiscriminatorNetwork d(cfg.grid, cfg.disc);
    d.init(streams.disc_init);

    nn::Adam adam_s(static_cast<float>(cfg.lr), static_cast<float>(cfg.beta1),
                    static_cast<float>(cfg.beta2));
    nn::Adam adam_g(static_cast<float>(cfg.lr), static_cast<float>(cfg.beta1),
                    static_cast<float>(cfg.beta2));
    nn::Adam adam_d(static_cast<float>(cfg.lr), static_cast<float>(cfg.beta1),
                    static_cast<float>(cfg.beta2));

    const auto s_params = s.params();
    const auto g_params = g->params();
    const auto d_params = d.params();
    const seg::ClassWeights weights{};
    const gan::AugmentorLossWeights lw{cfg.lambda_adv, cfg.lambda_big};
    const bool use_adversary = cfg.lambda_adv != 0.0;

    const int n_gen = cfg.batch_size / 2;
    const int n_lab = cfg.batch_size - n_gen;
    const int h = cfg.grid, w = cfg.grid;

    Phase1Result result;
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        double loss_d = 0.0;
        if (use_adversary) {
            // Discriminator step: real samples from labelled+unlabelled, fakes
            // from the generator (no gradient into G).
            nn::zero_grads(d_params);
            SliceBatch real = sample_real_batch(real_pool, n_gen, streams.data);
            SliceBatch src = sample_real_batch(labelled, n_gen, streams.data);
            Tensor z = gan::sample_z(n_gen, cfg.z_dim, streams.z);
            Tensor gen_out = g->forward(src.images, z, Mode::Train, false);
            Tensor fakes = generated_images(kind, src.images, gen_out);
            Tensor logits = d.forward(concat_rows(real.images, fakes), Mode::Train, true);
            Tensor real_logits = rows(logits, 0, n_gen);
            Tensor fake_logits = rows(logits, n_gen, n_gen);
            loss_d = gan::discriminator_loss(real_logits, fake_logits);
            ensure_finite(loss_d, "discriminator loss", iter, real, d_params);
            auto [dl_real, dl_fake] = gan::discriminator_loss_backward(real_logits, fake_logits);
            d.backward(concat_rows(dl_real, dl_fake), false);
            adam_d.step(d_params);
        }

        // Joint generator + segmenter step.
        nn::zero_grads(s_params);
        nn::zero_grads(g_params);
        nn::zero_grads(d_params);
        SliceBatch lab = sample_real_batch(labelled, n_lab, streams.data);
        SliceBatch src = sample_real_batch(labelled, n_gen, streams.data);
        Tensor z = gan::sample_z(n_gen, cfg.z_dim, streams.z);
        Tensor gen_out = g->forward(src.images, z, Mode::Train, true);
        Tensor x_g, y_g;
        synthesize_batch(kind, src, gen_out, x_g, y_g);

        Tensor s_in = concat_rows(lab.images, x_g);
        Tensor s_tgt = concat_rows(lab.labels, y_g);
        Tensor s_logits = s.forward(s_in, Mode::Train, true);
        const double loss_s =
            seg::weighted_cross_entropy(s_logits, s_tgt, weights, /*include_background=*/true);
        ensure_finite(loss_s, "segmentation loss", iter, lab, s_params);

        Tensor d_tgt;
        Tensor d_logits =
            seg::weighted_cross_entropy_backward(s_logits, s_tgt, weights, true, &d_tgt);

        Tensor fake_logits2;
        double loss_g = 0.0;
        if (use_adversary) {
            fake_logits2 = d.forward(x_g, Mode::Train, false);
            loss_g = gan::generator_loss(fake_logits2, gen_out, lw);
        } else {
            loss_g = gan::generator_loss(Tensor({n_gen, 2}), gen_out, lw);
        }
        ensure_finite(loss_g, "generator loss", iter, src, g_params);

        Tensor d_s_in = s.backward(d_logits, /*want_dx=*/true);
        Tensor d_xg = rows(d_s_in, n_lab, n_gen);
        Tensor d_yg = rows(d_tgt, n_lab, n_gen);
        if (use_adversary) {
            Tensor d_fake_logits = gan::adversarial_fool_term_backward(fake_logits2, cfg.lambda_adv);
            Tensor d_xg_adv = d.backward(d_fake_logits, /*want_dx=*/true);
            for (std::int64_t i = 0; i < d_xg.size(); ++i) d_xg[i] += d_xg_adv[i];
        }

        Tensor d_gen_out = gan::magnitude_term_backward(gen_out, cfg.lambda_big);
        if (kind == GeneratorKind::Deformation) {
            for (int i = 0; i < n_gen; ++i) {
                warp::DeformationField field{nth(gen_out, i)};
                Tensor src_img = nth(src.images, i).reshaped({h, w});
                Tensor dxg_i = nth(d_xg, i).reshaped({h, w});
                auto wg = warp::warp_bilinear_backward(src_img, field, dxg_i);
                Tensor dfl = warp::warp_labels_backward_field(nth(src.labels, i), field,
                                                              nth(d_yg, i));
                float* dst = d_gen_out.data() + static_cast<std::int64_t>(i) * h * w * 2;
                for (std::int64_t k = 0; k < wg.d_field.size(); ++k)
                    dst[k] += wg.d_field[k] + dfl[k];
            }
        } else {
            for (std::int64_t i = 0; i < d_gen_out.size(); ++i) d_gen_out[i] += d_xg[i];
        }
        g->backward(d_gen_out);

        adam_s.step(s_params);
        adam_g.step(g_params);

        result.final_loss_seg = loss_s;
        result.final_loss_disc = loss_d;
        result.final_loss_gen = loss_g;
        if (hooks.on_metrics) {
            double l1 = 0.0;
            for (std::int64_t i = 0; i < gen_out.size(); ++i)
                l1 += std::abs(static_cast<double>(gen_out[i]));
            hooks.on_metrics(iter, {{"loss_seg", loss_s},
                                    {"loss_disc", loss_d},
                                    {"loss_gen", loss_g},
                                    {"l1_mean", l1 / n_gen}});
        }
    }
    result.generator = std::move(g);
    return result;
}

// ---------------------------------------------------------------------------
// Phase 2

namespace {

std::vector<Tensor> snapshot_values(const std::vector<std::pair<std::string, Tensor*>>& state) {
    std::vector<Tensor> out;
    out.reserve(state.size());
    for (const auto& [name, t] : state) out.push_back(*t);
    return out;
}

void restore_values(const std::vector<std::pair<std::string, Tensor*>>& state,
                    const std::vector<Tensor>& snap) {
    for (size_t i = 0; i < state.size(); ++i) *state[i].second = snap[i];
}

}  // namespace

Phase2Result train_segmenter_augmented(const std::vector<gan::GeneratorNetwork*>& generators,
                                       AugMode mode, const TrainData& data, const TrainConfig& cfg,
                                       const TrainHooks& hooks) {
    if (data.labelled_ids.empty()) throw EmptySplit("phase 2 requires labelled subjects");
    gan::GeneratorNetwork* gd = nullptr;
    gan::GeneratorNetwork* gi = nullptr;
    for (gan::GeneratorNetwork* g : generators) {
        if (!g) continue;
        (g->kind() == GeneratorKind::Deformation ? gd : gi) = g;
    }
    if (aug_mode_needs_gd(mode) && !gd)
        throw std::invalid_argument("mode needs a deformation generator");
    if (aug_mode_needs_gi(mode) && !gi)
        throw std::invalid_argument("mode needs an intensity generator");

    data::SlicePool labelled = build_slice_pool(*data.records, data.labelled_ids);
    const auto val_records = select_records(*data.records, data.split.val_ids);

    Phase2Streams streams = make_phase2_streams(cfg);
    auto s = std::make_shared<seg::SegmentationNetwork>(cfg.unet);
    s->init(streams.seg_init);
    nn::Adam adam(static_cast<float>(cfg.lr), static_cast<float>(cfg.beta1),
                  static_cast<float>(cfg.beta2));
    const auto s_params = s->params();
    const auto s_state = s->state_tensors();
    const seg::ClassWeights weights{};

    Phase2Result result;
    std::vector<Tensor> best_snap = snapshot_values(s_state);
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        SliceBatch batch = assemble_phase2_batch(labelled, mode, gd, gi, cfg, streams.data,
                                                 streams.aug, streams.z);
        if (hooks.on_phase2_batch) hooks.on_phase2_batch(iter, batch);

        nn::zero_grads(s_params);
        Tensor logits = s->forward(batch.images, Mode::Train, true);
        const double loss =
            seg::weighted_cross_entropy(logits, batch.labels, weights,
                                        /*include_background=*/false);
        ensure_finite(loss, "segmentation loss", iter, batch, s_params);
        Tensor d_logits =
            seg::weighted_cross_entropy_backward(logits, batch.labels, weights, false);
        s->backward(d_logits, false);
        adam.step(s_params);

        if (hooks.on_metrics) hooks.on_metrics(iter, {{"loss_seg", loss}});

        const bool last = iter + 1 == cfg.iterations;
        if (!val_records.empty() && ((iter + 1) % cfg.val_interval == 0 || last)) {
            const double dice = validate(*s, val_records);
            result.val_trajectory.emplace_back(iter, dice);
            if (dice > result.best_val_dice) {
                result.best_val_dice = dice;
                result.best_iteration = iter;
                best_snap = snapshot_values(s_state);
            }
        }
    }

    auto best = std::make_shared<seg::SegmentationNetwork>(cfg.unet);
    restore_values(best->state_tensors(), best_snap);
    result.best = std::move(best);
    return result;
}

// ---------------------------------------------------------------------------

data::LabelVolume predict_volume(seg::SegmentationNetwork& net, const data::VolumeRecord& rec) {
    const int d = rec.depth(), h = rec.height(), w = rec.width();
    constexpr int kChunk = 8;  // bounds activation memory on big grids
    std::vector<Tensor> hard;
    hard.reserve(static_cast<size_t>(d));
    for (int z0 = 0; z0 < d; z0 += kChunk) {
        const int n = std::min(kChunk, d - z0);
        Tensor in({n, h, w, 1});
        std::copy(rec.image.data() + static_cast<std::int64_t>(z0) * h * w,
                  rec.image.data() + static_cast<std::int64_t>(z0 + n) * h * w, in.data());
        Tensor logits = net.forward(in, Mode::Eval, false);
        for (int z = 0; z < n; ++z) hard.push_back(seg::argmax_labels(nth(logits, z)));
    }
    return data::stack_predictions(hard);
}

double validate(seg::SegmentationNetwork& net, const std::vector<const data::VolumeRecord*>& vols) {
    if (vols.empty()) throw EmptySplit("validation set is empty");
    double total = 0.0;
    for (const data::VolumeRecord* rec : vols)
        total += seg::mean_foreground_dice(predict_volume(net, *rec), rec->labels);
    return total / static_cast<double>(vols.size());
}

std::vector<const data::VolumeRecord*> select_records(const std::vector<data::VolumeRecord>& all,
                                                      const std::vector<std::string>& ids) {
    std::vector<const data::VolumeRecord*> out;
    for (const auto& id : ids) {
        const data::VolumeRecord* found = nullptr;
        for (const auto& rec : all)
            if (rec.subject_id == id) {
                found = &rec;
                break;
            }
        if (!found) throw std::invalid_argument("unknown subject id " + id);
        out.push_back(found);
    }
    return out;
}

}  // namespace taskaug::train
