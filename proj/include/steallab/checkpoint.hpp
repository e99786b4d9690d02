#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "steallab/nn.hpp"

// Checkpoint container: a plain-text manifest (<stem>.manifest) describing the
// arch spec and the parameter names/shapes, plus a binary blob (<stem>.bin) of
// little-endian float32 values concatenated in manifest order.

namespace steallab {

constexpr int kCheckpointVersion = 1;

namespace detail {

inline std::string arch_kind_name(ArchKind k) { return k == ArchKind::MLP ? "mlp" : "smallconv"; }

inline ArchKind parse_arch_kind(const std::string& s) {
    if (s == "mlp") return ArchKind::MLP;
    if (s == "smallconv") return ArchKind::SmallConv;
    throw FormatError("unknown arch kind '" + s + "'");
}

}  // namespace detail

inline void save_checkpoint(const EncoderModel& m, const std::string& stem, uint64_t seed = 0) {
    std::ostringstream man;
    man << "format_version " << kCheckpointVersion << "\n";
    man << "seed " << seed << "\n";
    man << "arch.kind " << detail::arch_kind_name(m.arch.kind) << "\n";
    man << "arch.in " << m.arch.in_channels << " " << m.arch.in_h << " " << m.arch.in_w << "\n";
    man << "arch.hidden";
    for (int h : m.arch.hidden) man << " " << h;
    man << "\n";
    man << "arch.embed_dim " << m.arch.embed_dim << "\n";
    man << "arch.with_projector " << (m.arch.with_projector ? 1 : 0) << "\n";
    man << "arch.proj_dim " << m.arch.proj_dim << "\n";
    man << "params " << m.params.size() << "\n";
    for (const auto& nt : m.params) {
        man << nt.name;
        for (int64_t d : nt.tensor.shape) man << " " << d;
        man << "\n";
    }
    std::ofstream mf(stem + ".manifest");
    if (!mf) throw IoError("cannot write " + stem + ".manifest");
    mf << man.str();
    std::ofstream bf(stem + ".bin", std::ios::binary);
    if (!bf) throw IoError("cannot write " + stem + ".bin");
    for (const auto& nt : m.params)
        bf.write(reinterpret_cast<const char*>(nt.tensor.data.data()),
                 (std::streamsize)(nt.tensor.data.size() * sizeof(float)));
}

inline EncoderModel load_checkpoint(const std::string& stem) {
    std::ifstream mf(stem + ".manifest");
    if (!mf) throw IoError("cannot read " + stem + ".manifest");
    EncoderModel m;
    std::string line;
    size_t nparams = 0;
    while (std::getline(mf, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "format_version") {
            int v;
            ls >> v;
            if (v != kCheckpointVersion) throw FormatError("unsupported checkpoint version");
        } else if (key == "seed") {
            // informational
        } else if (key == "arch.kind") {
            std::string k;
            ls >> k;
            m.arch.kind = detail::parse_arch_kind(k);
        } else if (key == "arch.in") {
            ls >> m.arch.in_channels >> m.arch.in_h >> m.arch.in_w;
        } else if (key == "arch.hidden") {
            int h;
            m.arch.hidden.clear();
            while (ls >> h) m.arch.hidden.push_back(h);
        } else if (key == "arch.embed_dim") {
            ls >> m.arch.embed_dim;
        } else if (key == "arch.with_projector") {
            int b;
            ls >> b;
            m.arch.with_projector = b != 0;
        } else if (key == "arch.proj_dim") {
            ls >> m.arch.proj_dim;
        } else if (key == "params") {
            ls >> nparams;
            for (size_t i = 0; i < nparams; ++i) {
                if (!std::getline(mf, line)) throw FormatError("manifest ends before parameter list");
                std::istringstream ps(line);
                NamedTensor nt;
                ps >> nt.name;
                std::vector<int64_t> shape;
                int64_t d;
                while (ps >> d) shape.push_back(d);
                nt.tensor = Tensor(shape);
                m.params.push_back(std::move(nt));
            }
        }
    }
    m.embed_dim = m.arch.embed_dim;
    std::ifstream bf(stem + ".bin", std::ios::binary);
    if (!bf) throw IoError("cannot read " + stem + ".bin");
    for (auto& nt : m.params) {
        bf.read(reinterpret_cast<char*>(nt.tensor.data.data()),
                (std::streamsize)(nt.tensor.data.size() * sizeof(float)));
        if (!bf) throw FormatError("checkpoint blob shorter than manifest claims");
    }
    return m;
}

}  // namespace steallab
