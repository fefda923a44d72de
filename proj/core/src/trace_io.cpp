#include "sqzlink/io/trace_io.hpp"

#include <bit>
#include <filesystem>
#include <fstream>
#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "trace format is little-endian; big-endian hosts need byte swaps");

namespace sqz {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ColumnSpec {
    const char* name;
    const char* units;
    const char* rate;  // "detector" or "controller"
};

void write_binary(const fs::path& path, const void* data, std::size_t bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

template <typename T>
std::vector<T> read_binary(const fs::path& path, std::size_t count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<T> data(count);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(T)));
    if (!in) throw std::runtime_error("short read on " + path.string());
    return data;
}

}  // namespace

void write_trace(const std::string& dir, const SimulationTrace& trace,
                 const Scenario& scenario) {
    fs::create_directories(dir);
    json header;
    header["schema_version"] = scenario.schema_version;
    header["config_hash"] = scenario.config_hash();
    header["seed"] = scenario.seed;
    header["sample_rate_hz"] = trace.sample_rate_hz;
    header["controller_rate_hz"] = trace.controller_rate_hz;
    header["lock_acquired"] = trace.lock_acquired;
    header["acquisition_time_s"] = trace.acquisition_time_s;
    header["wrap_events_total"] = trace.wrap_events_total;
    header["wrap_events_after_acquisition"] = trace.wrap_events_after_acquisition;
    header["columns"] = json::array();

    auto add_f32 = [&](const char* name, const char* units, const char* rate,
                       const std::vector<float>& v) {
        write_binary(fs::path(dir) / (std::string(name) + ".bin"), v.data(),
                     v.size() * sizeof(float));
        header["columns"].push_back({{"name", name},
                                     {"units", units},
                                     {"rate", rate},
                                     {"dtype", "f32"},
                                     {"count", v.size()},
                                     {"file", std::string(name) + ".bin"}});
    };
    add_f32("homodyne", "shot_noise_sigma", "detector", trace.homodyne);
    add_f32("vacuum", "shot_noise_sigma", "detector", trace.vacuum);
    add_f32("dark", "shot_noise_sigma", "detector", trace.dark);
    add_f32("i", "adc_counts", "controller", trace.i_counts);
    add_f32("q", "adc_counts", "controller", trace.q_counts);
    add_f32("wrapped_phase", "rad", "controller", trace.wrapped_rad);
    add_f32("unwrapped_phase", "rad", "controller", trace.unwrapped_rad);
    add_f32("pzt_command", "rad_per_s", "controller", trace.pzt_cmd_rad_s);
    add_f32("eom_command", "rad", "controller", trace.eom_cmd_rad);
    add_f32("residual_phase", "rad", "controller", trace.residual_phase_rad);

    write_binary(fs::path(dir) / "fsm_state.bin", trace.fsm_state.data(),
                 trace.fsm_state.size());
    header["columns"].push_back({{"name", "fsm_state"},
                                 {"units", "enum"},
                                 {"rate", "controller"},
                                 {"dtype", "u8"},
                                 {"count", trace.fsm_state.size()},
                                 {"file", "fsm_state.bin"}});

    std::ofstream out(fs::path(dir) / "header.json");
    if (!out) throw std::runtime_error("cannot write trace header in " + dir);
    out << header.dump(2) << "\n";
}

LoadedTrace read_trace(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "header.json");
    if (!in) throw std::runtime_error("cannot open trace header in " + dir);
    json header = json::parse(in);
    LoadedTrace t;
    t.header_json = header.dump(2);
    t.config_hash = header.at("config_hash").get<std::uint64_t>();
    t.seed = header.at("seed").get<std::uint64_t>();
    t.sample_rate_hz = header.at("sample_rate_hz").get<double>();
    t.controller_rate_hz = header.at("controller_rate_hz").get<double>();
    for (const auto& col : header.at("columns")) {
        const auto name = col.at("name").get<std::string>();
        const auto file = col.at("file").get<std::string>();
        const auto count = col.at("count").get<std::size_t>();
        const auto dtype = col.at("dtype").get<std::string>();
        if (dtype == "f32")
            t.columns[name] = read_binary<float>(fs::path(dir) / file, count);
        else if (dtype == "u8")
            t.byte_columns[name] =
                read_binary<std::uint8_t>(fs::path(dir) / file, count);
        else
            throw std::runtime_error("unknown column dtype " + dtype);
    }
    return t;
}

void export_trace_csv(const std::string&, const SimulationTrace& trace,
                      const std::string& csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write " + csv_path);
    out << "time_s,i_counts,q_counts,wrapped_phase_rad,unwrapped_phase_rad,"
           "pzt_command_rad_per_s,eom_command_rad,fsm_state,residual_phase_rad\n";
    const double ts = 1.0 / trace.controller_rate_hz;
    for (std::size_t k = 0; k < trace.i_counts.size(); ++k) {
        out << static_cast<double>(k) * ts << ',' << trace.i_counts[k] << ','
            << trace.q_counts[k] << ',' << trace.wrapped_rad[k] << ','
            << trace.unwrapped_rad[k] << ',' << trace.pzt_cmd_rad_s[k] << ','
            << trace.eom_cmd_rad[k] << ','
            << static_cast<int>(trace.fsm_state[k]) << ','
            << trace.residual_phase_rad[k] << '\n';
    }
}

}  // namespace sqz
