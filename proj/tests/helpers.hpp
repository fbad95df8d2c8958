#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "pigflow/series.hpp"

namespace testutil {

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("pigflow_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const {
        return (path_ / name).string();
    }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

inline pigflow::PressureSeries
make_series(const std::vector<std::pair<pigflow::Timestamp, double>>& samples,
            pigflow::ChannelKind kind = pigflow::ChannelKind::StaticBar,
            double rate_hz = 1.0) {
    pigflow::PressureSeries s;
    s.station = "T";
    s.channel = kind;
    s.nominal_rate_hz = rate_hz;
    for (const auto& [t, v] : samples) {
        s.timestamps_us.push_back(t);
        s.values.push_back(v);
    }
    return s;
}

inline pigflow::UniformSeries make_uniform(pigflow::Timestamp start_us,
                                           std::int64_t step_us,
                                           std::vector<double> values) {
    pigflow::UniformSeries u;
    u.start_us = start_us;
    u.step_us = step_us;
    u.values = std::move(values);
    return u;
}

} // namespace testutil
