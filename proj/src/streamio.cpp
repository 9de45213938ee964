#include "fres/streamio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fres::streamio {

using nlohmann::json;

namespace {

json drive_json(const models::SourceConfig& src) {
    if (const auto* coh = src.coherent())
        return json{{"type", "coherent"}, {"rabi", coh->rabi}, {"detuning", coh->detuning}};
    return json{{"type", "incoherent"}, {"pump", src.pump()}};
}

models::Drive drive_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "coherent")
        return models::CoherentDrive{j.at("rabi").get<double>(), j.at("detuning").get<double>()};
    if (type == "incoherent") return models::IncoherentDrive{j.at("pump").get<double>()};
    throw ConfigError("unknown drive type: " + type);
}

} // namespace

json run_config_json(const mcjump::RunConfig& cfg) {
    json detectors = json::array();
    for (const auto& d : cfg.cascade.detectors)
        detectors.push_back({{"omega", d.omega}, {"linewidth", d.linewidth}, {"n_max", d.n_max}});
    json j;
    j["source"] = {{"gamma", cfg.cascade.source.gamma},
                   {"omega", cfg.cascade.source.omega},
                   {"drive", drive_json(cfg.cascade.source)}};
    j["detectors"] = detectors;
    j["chi"] = {{"chi0", cfg.cascade.chi0},
                {"chi1", cfg.cascade.chi1},
                {"chi2", cfg.cascade.chi2},
                {"chi3", cfg.cascade.chi3}};
    j["run"] = {{"dt", cfg.dt},
                {"seed", cfg.seed},
                {"duration", cfg.duration ? json(*cfg.duration) : json()},
                {"target_clicks", cfg.target_clicks ? json(*cfg.target_clicks) : json()},
                {"transient", cfg.transient ? json(*cfg.transient) : json()},
                {"recorded_channels", cfg.recorded_channels},
                {"sample_interval", cfg.sample_interval}};
    return j;
}

mcjump::RunConfig run_config_from_json(const json& j) {
    mcjump::RunConfig cfg;
    const json& src = j.at("source");
    cfg.cascade.source.gamma = src.at("gamma").get<double>();
    cfg.cascade.source.omega = src.at("omega").get<double>();
    cfg.cascade.source.drive = drive_from_json(src.at("drive"));
    for (const auto& d : j.at("detectors"))
        cfg.cascade.detectors.push_back({d.at("omega").get<double>(),
                                         d.at("linewidth").get<double>(),
                                         d.at("n_max").get<int>()});
    const json& chi = j.at("chi");
    cfg.cascade.chi0 = chi.at("chi0").get<double>();
    cfg.cascade.chi1 = chi.at("chi1").get<double>();
    cfg.cascade.chi2 = chi.at("chi2").get<double>();
    cfg.cascade.chi3 = chi.at("chi3").get<double>();
    const json& run = j.at("run");
    cfg.dt = run.at("dt").get<double>();
    cfg.seed = run.at("seed").get<std::uint64_t>();
    if (!run.at("duration").is_null()) cfg.duration = run.at("duration").get<double>();
    if (!run.at("target_clicks").is_null())
        cfg.target_clicks = run.at("target_clicks").get<std::uint64_t>();
    if (!run.at("transient").is_null()) cfg.transient = run.at("transient").get<double>();
    cfg.recorded_channels = run.at("recorded_channels").get<std::vector<int>>();
    cfg.sample_interval = run.at("sample_interval").get<double>();
    return cfg;
}

std::string format_g9(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

void write_clickstream(const std::filesystem::path& path, const mcjump::ClickStream& stream) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    out << "# fres-clickstream v1\n";
    out << "# run_id=" << stream.run_id << "\n";
    out << "# seed=" << stream.seed << "\n";
    out << "# trajectory=" << stream.trajectory << "\n";
    out << "# dt=" << format_g9(stream.dt) << "\n";
    out << "# duration=" << format_g9(stream.duration) << "\n";
    out << "# transient=" << format_g9(stream.transient) << "\n";
    for (std::size_t k = 0; k < stream.channel_labels.size(); ++k)
        out << "# channel." << k << "=" << stream.channel_labels[k] << "\n";
    out << "# recorded=";
    for (std::size_t k = 0; k < stream.recorded_channels.size(); ++k)
        out << (k ? "," : "") << stream.recorded_channels[k];
    out << "\n";
    out << "time,channel,label\n";
    for (const auto& r : stream.records) {
        const std::string label = r.channel >= 0 &&
                                          r.channel < static_cast<int>(stream.channel_labels.size())
                                      ? stream.channel_labels[static_cast<std::size_t>(r.channel)]
                                      : "?";
        out << format_g9(r.time) << "," << r.channel << "," << label << "\n";
    }
    if (!stream.config_json.empty()) {
        std::ofstream side(path.string() + ".json");
        side << stream.config_json << "\n";
    }
}

mcjump::ClickStream read_clickstream(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open for reading: " + path.string());
    mcjump::ClickStream stream;
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(2, eq - 2);
            std::string value = line.substr(eq + 1);
            if (key == "run_id") stream.run_id = value;
            else if (key == "seed") stream.seed = std::stoull(value);
            else if (key == "trajectory") stream.trajectory = std::stoull(value);
            else if (key == "dt") stream.dt = std::stod(value);
            else if (key == "duration") stream.duration = std::stod(value);
            else if (key == "transient") stream.transient = std::stod(value);
            else if (key == "recorded") {
                std::istringstream rs(value);
                std::string item;
                while (std::getline(rs, item, ','))
                    if (!item.empty()) stream.recorded_channels.push_back(std::stoi(item));
            } else if (key.rfind("channel.", 0) == 0) {
                const std::size_t idx = std::stoul(key.substr(8));
                if (stream.channel_labels.size() <= idx) stream.channel_labels.resize(idx + 1);
                stream.channel_labels[idx] = value;
            }
            continue;
        }
        if (!header_done) { // the column header row
            header_done = true;
            continue;
        }
        std::istringstream ss(line);
        std::string time_s, channel_s;
        std::getline(ss, time_s, ',');
        std::getline(ss, channel_s, ',');
        stream.records.push_back({std::stod(time_s), std::stoi(channel_s)});
    }
    std::ifstream side(path.string() + ".json");
    if (side) {
        std::stringstream buf;
        buf << side.rdbuf();
        stream.config_json = buf.str();
        while (!stream.config_json.empty() && stream.config_json.back() == '\n')
            stream.config_json.pop_back();
    }
    return stream;
}

void write_table(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    for (const auto& c : table.comments) out << "# " << c << "\n";
    for (std::size_t k = 0; k < table.columns.size(); ++k)
        out << table.columns[k] << (k + 1 < table.columns.size() ? "," : "\n");
    for (const auto& row : table.rows) {
        for (std::size_t k = 0; k < row.size(); ++k)
            out << format_g9(row[k]) << (k + 1 < row.size() ? "," : "\n");
    }
}

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open for reading: " + path.string());
    Table table;
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            table.comments.push_back(line.size() > 2 ? line.substr(2) : "");
            continue;
        }
        std::istringstream ss(line);
        std::string cell;
        if (!header_done) {
            while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
            header_done = true;
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace fres::streamio
