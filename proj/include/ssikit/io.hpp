#pragma once

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssikit/clustering.hpp"
#include "ssikit/consistency.hpp"
#include "ssikit/hankel.hpp"
#include "ssikit/modal.hpp"
#include "ssikit/record.hpp"
#include "ssikit/spectrum.hpp"

namespace ssikit {

/// Write-temp-then-rename so interrupted runs never leave truncated files.
template <typename WriteFn>
void atomic_write(const std::filesystem::path& path, WriteFn&& write) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
        write(out);
        if (!out) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string format_double(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

// ---- record CSV -----------------------------------------------------------

inline void write_record_csv(const std::filesystem::path& path,
                             const MultiChannelRecord& record) {
    validate(record, /*allow_nonfinite=*/true);
    atomic_write(path, [&](std::ofstream& out) {
        out << "# dt=" << format_double(record.dt) << "\n";
        if (!record.channel_labels.empty()) {
            out << "# channels=";
            for (std::size_t i = 0; i < record.channel_labels.size(); ++i)
                out << (i ? "," : "") << record.channel_labels[i];
            out << "\n";
        }
        for (Index k = 0; k < record.samples(); ++k) {
            for (Index c = 0; c < record.channels(); ++c)
                out << (c ? "," : "") << format_double(record.data(c, k));
            out << "\n";
        }
    });
}

inline MultiChannelRecord read_record_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_record_csv: cannot open " + path.string());
    MultiChannelRecord record;
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(" \t"));
            key.erase(key.find_last_not_of(" \t") + 1);
            std::string value = line.substr(eq + 1);
            if (key == "dt") {
                record.dt = std::stod(value);
            } else if (key == "channels") {
                std::stringstream ss(value);
                std::string label;
                while (std::getline(ss, label, ',')) record.channel_labels.push_back(label);
            }
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("read_record_csv: ragged row in " + path.string());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("read_record_csv: no samples in " + path.string());
    if (!(record.dt > 0.0))
        throw std::runtime_error("read_record_csv: missing '# dt=' header in " + path.string());
    const Index channels = static_cast<Index>(rows.front().size());
    record.data.resize(channels, static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k)
        for (Index c = 0; c < channels; ++c)
            record.data(c, static_cast<Index>(k)) = rows[k][static_cast<std::size_t>(c)];
    if (!record.channel_labels.empty() &&
        static_cast<Index>(record.channel_labels.size()) != channels)
        record.channel_labels.clear();
    return record;
}

inline void write_mask_csv(const std::filesystem::path& path, const OutlierMask& mask,
                           double dt) {
    atomic_write(path, [&](std::ofstream& out) {
        out << "# dt=" << format_double(dt) << "\n";
        for (Index k = 0; k < mask.cols(); ++k) {
            for (Index c = 0; c < mask.rows(); ++c) out << (c ? "," : "") << (mask(c, k) ? 1 : 0);
            out << "\n";
        }
    });
}

// ---- modal sets (JSON) -----------------------------------------------------

inline nlohmann::json modal_set_to_json(const ModalSet& set) {
    nlohmann::json poles = nlohmann::json::array();
    for (std::size_t i = 0; i < set.frequencies.size(); ++i) {
        nlohmann::json pole;
        pole["freq_hz"] = set.frequencies[i];
        pole["zeta"] = set.damping_ratios[i];
        std::vector<double> shape(set.mode_shapes.col(static_cast<Index>(i)).data(),
                                  set.mode_shapes.col(static_cast<Index>(i)).data() +
                                      set.mode_shapes.rows());
        pole["shape"] = shape;
        poles.push_back(std::move(pole));
    }
    return nlohmann::json{{"order", set.order}, {"poles", std::move(poles)}};
}

inline ModalSet modal_set_from_json(const nlohmann::json& j) {
    ModalSet set;
    set.order = j.at("order").get<Index>();
    const auto& poles = j.at("poles");
    Index shape_len = poles.empty() ? 0 : static_cast<Index>(poles[0].at("shape").size());
    set.mode_shapes.resize(shape_len, static_cast<Index>(poles.size()));
    for (std::size_t i = 0; i < poles.size(); ++i) {
        set.frequencies.push_back(poles[i].at("freq_hz").get<double>());
        set.damping_ratios.push_back(poles[i].at("zeta").get<double>());
        std::vector<double> shape = poles[i].at("shape").get<std::vector<double>>();
        for (Index r = 0; r < shape_len; ++r)
            set.mode_shapes(r, static_cast<Index>(i)) = shape[static_cast<std::size_t>(r)];
        set.spurious.push_back(false);
    }
    return set;
}

inline void write_modal_sets_json(const std::filesystem::path& path,
                                  const std::vector<ModalSet>& sets) {
    nlohmann::json arr = nlohmann::json::array();
    for (const ModalSet& s : sets) arr.push_back(modal_set_to_json(s));
    atomic_write(path, [&](std::ofstream& out) { out << arr.dump(2) << "\n"; });
}

inline std::vector<ModalSet> read_modal_sets_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_modal_sets_json: cannot open " + path.string());
    nlohmann::json arr = nlohmann::json::parse(in);
    std::vector<ModalSet> sets;
    for (const auto& j : arr) sets.push_back(modal_set_from_json(j));
    return sets;
}

// ---- consistency diagram ---------------------------------------------------

inline void write_diagram_tsv(const std::filesystem::path& path,
                              const ConsistencyDiagram& diagram) {
    atomic_write(path, [&](std::ofstream& out) {
        out << "order\tfreq_hz\tzeta\tfreq_stable\tdamp_stable\tshape_stable\tfully_consistent\n";
        for (const PoleRecord& r : diagram.records)
            out << r.order << '\t' << format_double(r.freq_hz) << '\t' << format_double(r.zeta)
                << '\t' << r.freq_stable << '\t' << r.damp_stable << '\t' << r.shape_stable << '\t'
                << r.fully_consistent() << "\n";
    });
}

/// Plot-ready file: pole scatter block then spectrum block, gnuplot-style
/// blocks separated by blank lines.
inline void write_plot_file(const std::filesystem::path& path, const ConsistencyDiagram& diagram) {
    atomic_write(path, [&](std::ofstream& out) {
        out << "# block: poles (freq_hz order flag)\n";
        for (const PoleRecord& r : diagram.records)
            out << format_double(r.freq_hz) << '\t' << r.order << '\t' << r.fully_consistent()
                << "\n";
        out << "\n\n# block: spectrum (freq_hz magnitude)\n";
        for (const auto& [freq, mag] : diagram.spectrum)
            out << format_double(freq) << '\t' << format_double(mag) << "\n";
    });
}

// ---- clustering ------------------------------------------------------------

inline void write_clusters_json(const std::filesystem::path& path,
                                const std::vector<PoleCluster>& clusters) {
    nlohmann::json arr = nlohmann::json::array();
    for (const PoleCluster& c : clusters) {
        nlohmann::json j;
        j["label"] = c.label;
        j["members"] = c.members;
        j["center_freq_hz"] = c.center_freq_hz;
        j["center_zeta"] = c.center_zeta;
        std::vector<double> shape(c.center_shape.data(), c.center_shape.data() + c.center_shape.size());
        j["center_shape"] = shape;
        arr.push_back(std::move(j));
    }
    atomic_write(path, [&](std::ofstream& out) { out << arr.dump(2) << "\n"; });
}

inline void write_trend_csv(const std::filesystem::path& path, const std::vector<TrendRow>& rows) {
    atomic_write(path, [&](std::ofstream& out) {
        std::size_t max_centers = 0;
        for (const TrendRow& r : rows) max_centers = std::max(max_centers, r.center_frequencies.size());
        out << "timestamp";
        for (std::size_t i = 0; i < max_centers; ++i) out << ",f" << i + 1;
        out << "\n";
        for (const TrendRow& r : rows) {
            out << format_double(r.timestamp);
            for (std::size_t i = 0; i < max_centers; ++i)
                out << ',' << (i < r.center_frequencies.size()
                                   ? format_double(r.center_frequencies[i])
                                   : std::string());
            out << "\n";
        }
    });
}

// ---- debug dumps -----------------------------------------------------------

inline void dump_covariances(const std::filesystem::path& directory, const CovarianceSet& cov) {
    std::filesystem::create_directories(directory);
    auto dump = [&](const char* name, const Matrix& m) {
        atomic_write(directory / (std::string(name) + ".csv"), [&](std::ofstream& out) {
            for (Index r = 0; r < m.rows(); ++r) {
                for (Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(r, c));
                out << "\n";
            }
        });
    };
    dump("spp", cov.spp);
    dump("spf", cov.spf);
    dump("sfp", cov.sfp);
    dump("sff", cov.sff);
}

}  // namespace ssikit
