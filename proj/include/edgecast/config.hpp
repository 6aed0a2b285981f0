#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace edgecast {

enum class ArchKind { Lstm, Transformer };

inline std::string arch_name(ArchKind a) {
    return a == ArchKind::Lstm ? "lstm" : "transformer";
}

inline ArchKind arch_from_name(const std::string& s) {
    if (s == "lstm") return ArchKind::Lstm;
    if (s == "transformer") return ArchKind::Transformer;
    throw std::invalid_argument("unknown architecture: " + s);
}

// architecture choice plus the size hyperparameters shared across modules;
// width is h_size for the LSTM and d_model for the transformer
struct NetConfig {
    ArchKind arch = ArchKind::Lstm;
    int input_len = 12;
    int width = 16;

    void validate() const {
        if (input_len < 1) throw std::invalid_argument("input_len must be >= 1");
        if (width < 1) throw std::invalid_argument("width must be >= 1");
    }
};

inline int ffn_hidden(const NetConfig& c) { return 4 * c.width; }

struct TrainSettings {
    int batch_size = 32;
    double learning_rate = 1e-3;
    int max_epochs = 100;
    int patience = 10;
    uint64_t seed = 0;
    int bitwidth = 8;  // for QAT

    void validate() const {
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
        if (patience >= max_epochs) throw std::invalid_argument("patience must be < max_epochs");
        if (bitwidth != 4 && bitwidth != 6 && bitwidth != 8)
            throw std::invalid_argument("bitwidth must be 4, 6 or 8");
    }
};

}  // namespace edgecast
