#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "edgecast/data.hpp"
#include "edgecast/int_infer.hpp"

namespace edgecast {

// compile-time adapters so the fit loops are written once for both networks

struct LstmArch {
    using Model = LstmModel;
    using Observers = LstmObservers;
    using Edges = LstmEdges;
    using Compiled = QuantLstm;
    static constexpr ArchKind kind = ArchKind::Lstm;

    static Model make(int n, int w, uint64_t seed) { return make_lstm(n, w, seed); }
    static int build_fp32(Tape& t, const Model& m, const std::vector<double>& x,
                          Observers* obs) {
        return build_lstm_fp32(t, m, x, obs);
    }
    static int build_qat(Tape& t, const Model& m, const Edges& e,
                         const std::vector<double>& x, Observers* obs) {
        return build_lstm_qat(t, m, e, x, obs);
    }
    static Edges make_edges(const Model& m, Observers& obs, int b) {
        return make_lstm_edges(m, obs, b);
    }
    static Compiled compile(const Model& m, const Edges& e) { return compile_lstm(m, e); }
    static int32_t run(const Compiled& q, const std::vector<double>& x) {
        return run_lstm_int(q, x);
    }
};

struct TransformerArch {
    using Model = TransformerModel;
    using Observers = TransformerObservers;
    using Edges = TransformerEdges;
    using Compiled = QuantTransformer;
    static constexpr ArchKind kind = ArchKind::Transformer;

    static Model make(int n, int w, uint64_t seed) { return make_transformer(n, w, seed); }
    static int build_fp32(Tape& t, const Model& m, const std::vector<double>& x,
                          Observers* obs) {
        return build_transformer_fp32(t, m, x, obs);
    }
    static int build_qat(Tape& t, const Model& m, const Edges& e,
                         const std::vector<double>& x, Observers* obs) {
        return build_transformer_qat(t, m, e, x, obs);
    }
    static Edges make_edges(const Model& m, Observers& obs, int b) {
        return make_transformer_edges(m, obs, b);
    }
    static Compiled compile(const Model& m, const Edges& e) {
        return compile_transformer(m, e);
    }
    static int32_t run(const Compiled& q, const std::vector<double>& x) {
        return run_transformer_int(q, x);
    }
};

inline void adam_step(ParamStore& store, double lr, int64_t step, double beta1 = 0.9,
                      double beta2 = 0.999, double eps = 1e-8) {
    const double bc1 = 1.0 - std::pow(beta1, double(step));
    const double bc2 = 1.0 - std::pow(beta2, double(step));
    for (auto& p : store.params)
        for (size_t i = 0; i < p.v.size(); ++i) {
            p.m[i] = beta1 * p.m[i] + (1.0 - beta1) * p.g[i];
            p.vel[i] = beta2 * p.vel[i] + (1.0 - beta2) * p.g[i] * p.g[i];
            p.v[i] -= lr * (p.m[i] / bc1) / (std::sqrt(p.vel[i] / bc2) + eps);
        }
}

struct TrainResult {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    int epochs_run = 0;
};

namespace detail {

inline std::vector<size_t> shuffled_indices(size_t n, Rng& rng) {
    std::vector<size_t> idx(n, 0);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    for (size_t i = n; i-- > 1;) std::swap(idx[i], idx[size_t(rng.randint(0, int64_t(i)))]);
    return idx;
}

inline std::vector<std::vector<double>> snapshot(const ParamStore& s) {
    std::vector<std::vector<double>> out;
    out.reserve(s.params.size());
    for (const auto& p : s.params) out.push_back(p.v);
    return out;
}

inline void restore(ParamStore& s, const std::vector<std::vector<double>>& snap) {
    for (size_t i = 0; i < snap.size(); ++i) s.params[i].v = snap[i];
}

inline void check_dataset(const WindowedDataset& ds, int input_len, const char* name) {
    if (ds.size() == 0) throw std::invalid_argument(std::string(name) + " set is empty");
    if (int(ds.inputs[0].size()) != input_len)
        throw std::invalid_argument(std::string(name) + " window length mismatch");
}

}  // namespace detail

template <class A>
double eval_fp32(typename A::Model& m, const WindowedDataset& ds) {
    double acc = 0.0;
    for (size_t i = 0; i < ds.size(); ++i) {
        Tape t(&m.store);
        const double err = t.val(A::build_fp32(t, m, ds.inputs[i], nullptr))[0] - ds.targets[i];
        acc += err * err;
    }
    return acc / double(ds.size());
}

template <class A>
double eval_quantized(typename A::Model& m, const typename A::Edges& e,
                      const WindowedDataset& ds) {
    double acc = 0.0;
    for (size_t i = 0; i < ds.size(); ++i) {
        Tape t(&m.store);
        const double err =
            t.val(A::build_qat(t, m, e, ds.inputs[i], nullptr))[0] - ds.targets[i];
        acc += err * err;
    }
    return acc / double(ds.size());
}

template <class A>
double eval_compiled(const typename A::Compiled& q, const WindowedDataset& ds) {
    double acc = 0.0;
    for (size_t i = 0; i < ds.size(); ++i) {
        const double err = dequantize_value(A::run(q, ds.inputs[i]), q.e.out) - ds.targets[i];
        acc += err * err;
    }
    return acc / double(ds.size());
}

// minibatch Adam on the full-precision graph with early stopping on validation
// mse; the model is left at its best checkpoint
template <class A>
TrainResult fit_fp32(typename A::Model& m, const WindowedDataset& train,
                     const WindowedDataset& val, const TrainSettings& s) {
    s.validate();
    detail::check_dataset(train, m.cfg.input_len, "train");
    detail::check_dataset(val, m.cfg.input_len, "validation");
    Rng rng(derive_seed(s.seed, 0x7e41));
    TrainResult r;
    auto best = detail::snapshot(m.store);
    int since_best = 0;
    int64_t step = 0;
    for (int epoch = 0; epoch < s.max_epochs; ++epoch) {
        const auto order = detail::shuffled_indices(train.size(), rng);
        double total = 0.0;
        for (size_t start = 0; start < order.size(); start += size_t(s.batch_size)) {
            const size_t end = std::min(start + size_t(s.batch_size), order.size());
            const double bsz = double(end - start);
            m.store.zero_grad();
            double batch_loss = 0.0;
            for (size_t k = start; k < end; ++k) {
                const size_t i = order[k];
                Tape t(&m.store);
                const int out = A::build_fp32(t, m, train.inputs[i], nullptr);
                const double err = t.val(out)[0] - train.targets[i];
                batch_loss += err * err;
                t.backward(out, {2.0 * err / bsz});
            }
            if (!std::isfinite(batch_loss)) throw std::runtime_error("training diverged");
            adam_step(m.store, s.learning_rate, ++step);
            total += batch_loss;
        }
        r.train_loss.push_back(total / double(train.size()));
        const double vloss = eval_fp32<A>(m, val);
        if (!std::isfinite(vloss)) throw std::runtime_error("training diverged");
        r.val_loss.push_back(vloss);
        r.epochs_run = epoch + 1;
        if (vloss < r.best_val) {
            r.best_val = vloss;
            r.best_epoch = epoch;
            best = detail::snapshot(m.store);
            since_best = 0;
        } else if (++since_best >= s.patience) {
            break;
        }
    }
    detail::restore(m.store, best);
    return r;
}

template <class A>
struct FitOutcome {
    typename A::Edges edges;
    typename A::Compiled net;
    TrainResult history;
};

// quantization-aware fit: grids come from range observers seeded by a
// full-precision calibration pass, refreshed per batch from live weights, and
// sealed by a union pass under the best checkpoint before compilation
template <class A>
FitOutcome<A> fit_quantized(typename A::Model& m, const WindowedDataset& train,
                            const WindowedDataset& val, const TrainSettings& s) {
    s.validate();
    detail::check_dataset(train, m.cfg.input_len, "train");
    detail::check_dataset(val, m.cfg.input_len, "validation");
    Rng rng(derive_seed(s.seed, 0x9a7b));
    typename A::Observers obs;
    // calibration windows are strided across the whole training period so the
    // grids cover rare extremes, not just the earliest stretch of the series
    const size_t calib = std::min<size_t>(train.size(), 256);
    const size_t stride = std::max<size_t>(1, train.size() / calib);
    for (size_t k = 0; k < calib; ++k) {
        Tape t(&m.store);
        A::build_fp32(t, m, train.inputs[k * stride], &obs);
    }
    obs.commit();

    TrainResult r;
    auto best = detail::snapshot(m.store);
    int since_best = 0;
    int64_t step = 0;
    for (int epoch = 0; epoch < s.max_epochs; ++epoch) {
        const auto order = detail::shuffled_indices(train.size(), rng);
        double total = 0.0;
        for (size_t start = 0; start < order.size(); start += size_t(s.batch_size)) {
            const size_t end = std::min(start + size_t(s.batch_size), order.size());
            const double bsz = double(end - start);
            const auto e = A::make_edges(m, obs, s.bitwidth);
            m.store.zero_grad();
            double batch_loss = 0.0;
            for (size_t k = start; k < end; ++k) {
                const size_t i = order[k];
                Tape t(&m.store);
                const int out = A::build_qat(t, m, e, train.inputs[i], &obs);
                const double err = t.val(out)[0] - train.targets[i];
                batch_loss += err * err;
                t.backward(out, {2.0 * err / bsz});
            }
            if (!std::isfinite(batch_loss)) throw std::runtime_error("training diverged");
            adam_step(m.store, s.learning_rate, ++step);
            obs.commit();
            total += batch_loss;
        }
        r.train_loss.push_back(total / double(train.size()));
        const auto e = A::make_edges(m, obs, s.bitwidth);
        const double vloss = eval_quantized<A>(m, e, val);
        if (!std::isfinite(vloss)) throw std::runtime_error("training diverged");
        r.val_loss.push_back(vloss);
        r.epochs_run = epoch + 1;
        if (vloss < r.best_val) {
            r.best_val = vloss;
            r.best_epoch = epoch;
            best = detail::snapshot(m.store);
            since_best = 0;
        } else if (++since_best >= s.patience) {
            break;
        }
    }
    detail::restore(m.store, best);

    // seal the envelopes around whatever the best weights actually produce;
    // the unclipped forward is used here because a pass through the quantized
    // graph saturates at the stale grids and cannot widen downstream stages
    for (size_t k = 0; k < calib; ++k) {
        Tape t(&m.store);
        A::build_fp32(t, m, train.inputs[k * stride], &obs);
    }
    obs.union_commit();

    FitOutcome<A> out;
    out.edges = A::make_edges(m, obs, s.bitwidth);
    out.net = A::compile(m, out.edges);
    out.history = r;
    return out;
}

}  // namespace edgecast
