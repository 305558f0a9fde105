#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace flowaug {

inline constexpr int kFeatures = 3;
inline constexpr int kSeqLen = 20;
inline constexpr int kFeatSize = 0;
inline constexpr int kFeatDir = 1;
inline constexpr int kFeatIat = 2;

inline constexpr double kMaxPktSize = 1460.0;
inline constexpr double kIatFloor = 1e-7;

// Raised for malformed or inconsistent input data (CLI maps it to exit code 2).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One flow: a 3x20 packet time series (size, direction, IAT) plus label.
// Raw domain: size in [0,1460] bytes, dir in {-1,+1}, IAT in seconds (>= 0,
// 0 for the first packet). Columns at t >= valid_len are zero padding.
struct FlowTensor {
    std::string flow_id;
    std::string label;
    std::array<std::array<double, kSeqLen>, kFeatures> values{};  // [feature][t]
    int valid_len = 0;

    double& at(int d, int t) { return values[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)]; }
    double at(int d, int t) const { return values[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)]; }

    bool same_values(const FlowTensor& o) const { return values == o.values; }
};

inline double clip(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Builds a FlowTensor from per-packet arrays: truncate/zero-pad to kSeqLen,
// clip sizes to [0,1460], coerce direction to sign (-1 for negative, else +1).
inline FlowTensor make_flow(std::string flow_id, std::string label,
                            const std::vector<double>& pkt_size,
                            const std::vector<double>& dir,
                            const std::vector<double>& iat) {
    if (pkt_size.empty() || pkt_size.size() != dir.size() || pkt_size.size() != iat.size())
        throw DataError("inconsistent packet array lengths for flow '" + flow_id + "'");
    FlowTensor f;
    f.flow_id = std::move(flow_id);
    f.label = std::move(label);
    f.valid_len = static_cast<int>(std::min<std::size_t>(pkt_size.size(), kSeqLen));
    for (int t = 0; t < f.valid_len; ++t) {
        const auto u = static_cast<std::size_t>(t);
        f.at(kFeatSize, t) = clip(pkt_size[u], 0.0, kMaxPktSize);
        f.at(kFeatDir, t) = dir[u] < 0.0 ? -1.0 : 1.0;
        f.at(kFeatIat, t) = iat[u] < 0.0 ? 0.0 : iat[u];
    }
    return f;
}

inline FlowTensor parse_flow_json(const nlohmann::json& j) {
    const auto arr = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_array())
            throw DataError(std::string("missing or non-array field '") + key + "'");
        return j.at(key).get<std::vector<double>>();
    };
    if (!j.contains("flow_id") || !j.contains("label"))
        throw DataError("missing flow_id or label");
    return make_flow(j.at("flow_id").get<std::string>(), j.at("label").get<std::string>(),
                     arr("pkt_size"), arr("dir"), arr("iat"));
}

inline nlohmann::json flow_to_json(const FlowTensor& f) {
    nlohmann::json j;
    j["flow_id"] = f.flow_id;
    j["label"] = f.label;
    std::vector<double> size, dir, iat;
    for (int t = 0; t < f.valid_len; ++t) {
        size.push_back(f.at(kFeatSize, t));
        dir.push_back(f.at(kFeatDir, t));
        iat.push_back(f.at(kFeatIat, t));
    }
    j["pkt_size"] = size;
    j["dir"] = dir;
    j["iat"] = iat;
    return j;
}

// JSON Lines reader; reports the 1-based line number on malformed input.
inline std::vector<FlowTensor> ingest_jsonl(std::istream& in) {
    std::vector<FlowTensor> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            out.push_back(parse_flow_json(j));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(lineno) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<FlowTensor> ingest_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);
    return ingest_jsonl(in);
}

inline void write_jsonl(std::ostream& out, const std::vector<FlowTensor>& flows) {
    for (const auto& f : flows) out << flow_to_json(f).dump() << '\n';
}

// Keeps flows observed for more than min_pkts packets, in input order.
inline std::vector<FlowTensor> curate(const std::vector<FlowTensor>& flows, int min_pkts = 10) {
    std::vector<FlowTensor> out;
    for (const auto& f : flows)
        if (f.valid_len > min_pkts) out.push_back(f);
    if (out.empty()) throw DataError("no flows survive curation");
    return out;
}

}  // namespace flowaug
