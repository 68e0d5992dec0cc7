#include "lowpapr/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#ifndef LOWPAPR_VERSION
#define LOWPAPR_VERSION "0.0.0"
#endif

namespace lowpapr {

using nlohmann::json;

namespace {

std::string join_issues(const std::vector<ValidationIssue>& issues)
{
    std::string out = "invalid scenario";
    for (const auto& i : issues) out += "\n  " + i.path + ": " + i.message;
    return out;
}

// ---------------------------------------------------------------- bundled scenarios

const std::map<std::string, std::string>& bundled()
{
    static const std::map<std::string, std::string> table = {
        {"papr_ccdf_96", R"({
  "name": "papr_ccdf_96",
  "description": "PAPR CCDF of the low-PAPR constellations, N_sc = 96, N_fft = 2048",
  "experiment": "papr_ccdf",
  "seed": 1,
  "trials": 100000,
  "ofdm": {"n_sc": 96, "n_fft": 2048, "n_cp": 144, "scs_hz": 15000},
  "curves": [
    {"scheme": "QPSK", "beta_db": 0},
    {"scheme": "QPSK", "beta_db": -14},
    {"scheme": "PI2_BPSK", "beta_db": 0},
    {"scheme": "PI2_BPSK", "beta_db": -14},
    {"scheme": "RO_QPSK", "beta_db": 0},
    {"scheme": "RO_QPSK", "beta_db": -5}
  ],
  "ccdf_grid_db": {"start": 0, "stop": 12, "step": 0.01}
}
)"},
        {"oob_psd_288", R"({
  "name": "oob_psd_288",
  "description": "Closed-form average PSD, N_sc = 288, CP of 9/128 of the useful symbol",
  "experiment": "oob_psd",
  "seed": 1,
  "trials": 1,
  "ofdm": {"n_sc": 288, "n_fft": 1024, "n_cp": 72, "scs_hz": 15000},
  "curves": [
    {"scheme": "QPSK", "beta_db": 0},
    {"scheme": "QPSK", "beta_db": -14},
    {"scheme": "PI2_BPSK", "beta_db": 0},
    {"scheme": "PI2_BPSK", "beta_db": -14},
    {"scheme": "RO_QPSK", "beta_db": 0},
    {"scheme": "RO_QPSK", "beta_db": -5}
  ],
  "psd_grid_sc": {"start": -288, "stop": 576, "step": 0.25}
}
)"},
        {"ber_ntn_tdl_c", R"({
  "name": "ber_ntn_tdl_c",
  "description": "Uncoded BER, Monte-Carlo and semi-analytic, NTN-TDL-C with MMSE",
  "experiment": "uncoded_ber",
  "seed": 1,
  "trials": 20000,
  "ofdm": {"n_sc": 96, "n_fft": 1024, "n_cp": 72, "scs_hz": 15000},
  "curves": [
    {"scheme": "QPSK", "beta_db": 0},
    {"scheme": "QPSK", "beta_db": -14},
    {"scheme": "PI2_BPSK", "beta_db": 0},
    {"scheme": "PI2_BPSK", "beta_db": -14},
    {"scheme": "RO_QPSK", "beta_db": 0}
  ],
  "channel": {"profile": "NTN-TDL-C", "doppler_hz": 200},
  "equalizers": ["MMSE"],
  "snr_db": {"start": 0, "stop": 14, "step": 1},
  "ber": {"symbols_per_realization": 14, "min_errors": 100, "min_realizations": 64, "batch": 64},
  "export_llr_symbols": 1
}
)"},
        {"ber_equalizers", R"({
  "name": "ber_equalizers",
  "description": "Uncoded BER with MF, ZF and MMSE equalization, NTN-TDL-A",
  "experiment": "uncoded_ber",
  "seed": 1,
  "trials": 20000,
  "ofdm": {"n_sc": 96, "n_fft": 1024, "n_cp": 72, "scs_hz": 15000},
  "curves": [
    {"scheme": "QPSK", "beta_db": 0},
    {"scheme": "PI2_BPSK", "beta_db": 0},
    {"scheme": "RO_QPSK", "beta_db": 0}
  ],
  "channel": {"profile": "NTN-TDL-A", "doppler_hz": 200},
  "equalizers": ["MF", "ZF", "MMSE"],
  "snr_db": {"start": 0, "stop": 14, "step": 2},
  "ber": {"symbols_per_realization": 14, "min_errors": 100, "min_realizations": 64, "batch": 64}
}
)"},
        {"capacity_ntn_tdl_c", R"({
  "name": "capacity_ntn_tdl_c",
  "description": "Binary-input capacity with Gaussian interference, NTN-TDL-C, N_sc = 96, MMSE",
  "experiment": "capacity",
  "seed": 1,
  "trials": 2000,
  "ofdm": {"n_sc": 96, "n_fft": 1024, "n_cp": 72, "scs_hz": 15000},
  "curves": [
    {"scheme": "QPSK", "beta_db": 0},
    {"scheme": "QPSK", "beta_db": -14},
    {"scheme": "PI2_BPSK", "beta_db": 0},
    {"scheme": "PI2_BPSK", "beta_db": -14},
    {"scheme": "RO_QPSK", "beta_db": 0}
  ],
  "channel": {"profile": "NTN-TDL-C", "doppler_hz": 200},
  "equalizers": ["MMSE"],
  "snr_db": {"start": -10, "stop": 20, "step": 1}
}
)"},
    };
    return table;
}

// ---------------------------------------------------------------- JSON reading

class Reader {
public:
    std::vector<ValidationIssue> issues;

    void fail(const std::string& path, const std::string& msg) { issues.push_back({path, msg}); }

    const json* field(const json& obj, const std::string& key, const std::string& path, bool required)
    {
        if (!obj.is_object()) return nullptr;
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) {
            if (required) fail(path, "required field is missing");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& obj, const std::string& key, const std::string& path, bool required)
    {
        const json* v = field(obj, key, path, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            fail(path, "expected a number");
            return std::nullopt;
        }
        const double d = v->get<double>();
        if (!std::isfinite(d)) {
            fail(path, "must be finite");
            return std::nullopt;
        }
        return d;
    }

    std::optional<std::int64_t> integer(const json& obj, const std::string& key, const std::string& path,
                                        bool required)
    {
        const json* v = field(obj, key, path, required);
        if (!v) return std::nullopt;
        if (!v->is_number_integer()) {
            fail(path, "expected an integer");
            return std::nullopt;
        }
        return v->get<std::int64_t>();
    }

    std::optional<std::string> text(const json& obj, const std::string& key, const std::string& path, bool required)
    {
        const json* v = field(obj, key, path, required);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            fail(path, "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    void unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& prefix)
    {
        if (!obj.is_object()) return;
        for (const auto& [k, _] : obj.items()) {
            if (!allowed.count(k)) fail(prefix.empty() ? k : prefix + "." + k, "unknown field");
        }
    }

    std::optional<Grid> grid(const json& obj, const std::string& key, const std::string& path)
    {
        const json* v = field(obj, key, path, false);
        if (!v) return std::nullopt;
        if (!v->is_object()) {
            fail(path, "expected an object {start, stop, step}");
            return std::nullopt;
        }
        unknown_keys(*v, {"start", "stop", "step"}, path);
        const auto start = number(*v, "start", path + ".start", true);
        const auto stop = number(*v, "stop", path + ".stop", true);
        const auto step = number(*v, "step", path + ".step", true);
        if (!start || !stop || !step) return std::nullopt;
        if (!(*step > 0.0)) {
            fail(path + ".step", "must be positive");
            return std::nullopt;
        }
        if (*stop < *start) {
            fail(path + ".stop", "must not be below start");
            return std::nullopt;
        }
        return Grid{*start, *stop, *step};
    }
};

std::optional<Experiment> parse_experiment(const std::string& s)
{
    for (auto e : {Experiment::PaprCcdf, Experiment::OobPsd, Experiment::UncodedBer, Experiment::Capacity,
                   Experiment::SinrTable}) {
        if (s == to_string(e)) return e;
    }
    return std::nullopt;
}

bool is_link(Experiment e)
{
    return e == Experiment::UncodedBer || e == Experiment::Capacity || e == Experiment::SinrTable;
}

json grid_json(const Grid& g) { return {{"start", g.start}, {"stop", g.stop}, {"step", g.step}}; }

json echo_json(const Scenario& s)
{
    json j;
    j["name"] = s.name;
    j["description"] = s.description;
    j["experiment"] = std::string(to_string(s.experiment));
    j["seed"] = s.seed;
    j["trials"] = s.trials;
    j["ofdm"] = {{"n_sc", s.ofdm.n_sc}, {"n_fft", s.ofdm.n_fft}, {"n_cp", s.ofdm.n_cp}, {"scs_hz", s.ofdm.scs_hz}};
    j["curves"] = json::array();
    for (const auto& c : s.curves) j["curves"].push_back({{"scheme", std::string(to_string(c.scheme))}, {"beta_db", c.beta_db}});
    switch (s.experiment) {
    case Experiment::PaprCcdf: j["ccdf_grid_db"] = grid_json(s.ccdf_grid); break;
    case Experiment::OobPsd: j["psd_grid_sc"] = grid_json(s.psd_grid); break;
    default: {
        json ch = {{"profile", s.channel}, {"doppler_hz", s.doppler_hz}};
        if (s.delay_scaling_s) ch["delay_scaling_s"] = *s.delay_scaling_s;
        j["channel"] = ch;
        j["equalizers"] = json::array();
        for (auto e : s.equalizers) j["equalizers"].push_back(std::string(to_string(e)));
        j["snr_db"] = s.snr_db;
        if (s.experiment == Experiment::UncodedBer) {
            j["ber"] = {{"symbols_per_realization", s.ber.symbols_per_realization},
                        {"min_errors", s.ber.min_errors},
                        {"min_realizations", s.ber.min_realizations},
                        {"batch", s.ber.batch}};
            j["export_llr_symbols"] = s.ber.export_llr_symbols;
            if (std::isfinite(s.mse_db)) j["mse_db"] = s.mse_db;
        }
        break;
    }
    }
    return j;
}

// ---------------------------------------------------------------- CSV output

std::string fmt(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class CsvFile {
public:
    CsvFile(const std::filesystem::path& path, const std::string& header) : path_(path), out_(path)
    {
        if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
        out_ << header << '\n';
    }

    template <typename... Ts>
    void row(const Ts&... cells)
    {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
    }

    const std::filesystem::path& path() const { return path_; }

private:
    static std::string cell(double v) { return fmt(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(std::string_view s) { return std::string(s); }
    static std::string cell(const char* s) { return s; }
    template <typename I>
        requires std::is_integral_v<I>
    static std::string cell(I v)
    {
        return std::to_string(v);
    }

    std::filesystem::path path_;
    std::ofstream out_;
};

constexpr const char* kSpectrumHeader = "x,y,scheme,beta_db,n_sc,n_fft,seed";
constexpr const char* kCurveHeader = "snr_db,value,scheme,channel,equalizer,seed,n_realizations";

LinkConfig make_link(const Scenario& s, const CurveSpec& c, EqualizerKind eq, const TapProfile& profile)
{
    LinkConfig link;
    link.tx = TxChain::make(c.scheme, c.beta_db, s.ofdm);
    link.profile = profile;
    link.doppler_hz = s.doppler_hz;
    link.equalizer = eq;
    link.mse_db = s.mse_db;
    return link;
}

}  // namespace

std::string_view to_string(Experiment e)
{
    switch (e) {
    case Experiment::PaprCcdf: return "papr_ccdf";
    case Experiment::OobPsd: return "oob_psd";
    case Experiment::UncodedBer: return "uncoded_ber";
    case Experiment::Capacity: return "capacity";
    case Experiment::SinrTable: return "sinr_table";
    }
    return "?";
}

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues))
{
}

std::string CurveSpec::label() const
{
    std::string out(to_string(scheme));
    if (beta_db != 0.0) out += "+FDSS(" + fmt(beta_db) + "dB)";
    return out;
}

std::vector<double> Grid::values() const
{
    std::vector<double> out;
    const auto steps = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= steps; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
}

Scenario parse_scenario(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::vector<ValidationIssue>{{"$", std::string("not valid JSON: ") + e.what()}});
    }
    if (!j.is_object()) throw ValidationError(std::vector<ValidationIssue>{{"$", "scenario must be a JSON object"}});

    Reader rd;
    rd.unknown_keys(j, {"name", "description", "experiment", "seed", "trials", "ofdm", "curves", "channel",
                        "equalizers", "snr_db", "mse_db", "ber", "export_llr_symbols", "ccdf_grid_db", "psd_grid_sc"},
                    "");
    Scenario s;
    s.name = rd.text(j, "name", "name", false).value_or("unnamed");
    s.description = rd.text(j, "description", "description", false).value_or("");

    if (auto e = rd.text(j, "experiment", "experiment", true)) {
        if (auto ex = parse_experiment(*e)) {
            s.experiment = *ex;
        } else {
            rd.fail("experiment", "unknown experiment '" + *e +
                                      "' (expected papr_ccdf, oob_psd, uncoded_ber, capacity or sinr_table)");
        }
    }
    if (auto seed = rd.integer(j, "seed", "seed", true)) {
        if (*seed < 0) rd.fail("seed", "must be non-negative");
        s.seed = static_cast<std::uint64_t>(*seed);
    }
    if (auto t = rd.integer(j, "trials", "trials", true)) s.trials = *t;

    if (const json* o = rd.field(j, "ofdm", "ofdm", true)) {
        rd.unknown_keys(*o, {"n_sc", "n_fft", "n_cp", "scs_hz"}, "ofdm");
        if (auto v = rd.integer(*o, "n_sc", "ofdm.n_sc", true)) s.ofdm.n_sc = *v;
        if (auto v = rd.integer(*o, "n_fft", "ofdm.n_fft", true)) s.ofdm.n_fft = *v;
        if (auto v = rd.integer(*o, "n_cp", "ofdm.n_cp", true)) s.ofdm.n_cp = *v;
        if (auto v = rd.number(*o, "scs_hz", "ofdm.scs_hz", false)) s.ofdm.scs_hz = *v;
    }

    if (const json* c = rd.field(j, "curves", "curves", true)) {
        if (!c->is_array() || c->empty()) {
            rd.fail("curves", "expected a non-empty array");
        } else {
            for (std::size_t i = 0; i < c->size(); ++i) {
                const std::string path = "curves[" + std::to_string(i) + "]";
                const json& cj = (*c)[i];
                if (!cj.is_object()) {
                    rd.fail(path, "expected an object {scheme, beta_db}");
                    continue;
                }
                rd.unknown_keys(cj, {"scheme", "beta_db"}, path);
                CurveSpec spec;
                if (auto name = rd.text(cj, "scheme", path + ".scheme", true)) {
                    try {
                        spec.scheme = parse_scheme(*name);
                    } catch (const DomainError& e) {
                        rd.fail(path + ".scheme", e.what());
                    }
                }
                spec.beta_db = rd.number(cj, "beta_db", path + ".beta_db", false).value_or(0.0);
                s.curves.push_back(spec);
            }
        }
    }

    if (const json* ch = rd.field(j, "channel", "channel", false)) {
        rd.unknown_keys(*ch, {"profile", "doppler_hz", "delay_scaling_s"}, "channel");
        s.channel = rd.text(*ch, "profile", "channel.profile", true).value_or("AWGN");
        s.doppler_hz = rd.number(*ch, "doppler_hz", "channel.doppler_hz", false).value_or(0.0);
        s.delay_scaling_s = rd.number(*ch, "delay_scaling_s", "channel.delay_scaling_s", false);
    }

    if (const json* eqs = rd.field(j, "equalizers", "equalizers", false)) {
        s.equalizers.clear();
        if (!eqs->is_array() || eqs->empty()) {
            rd.fail("equalizers", "expected a non-empty array");
        } else {
            for (std::size_t i = 0; i < eqs->size(); ++i) {
                const std::string path = "equalizers[" + std::to_string(i) + "]";
                if (!(*eqs)[i].is_string()) {
                    rd.fail(path, "expected a string");
                    continue;
                }
                try {
                    s.equalizers.push_back(parse_equalizer((*eqs)[i].get<std::string>()));
                } catch (const DomainError& e) {
                    rd.fail(path, e.what());
                }
            }
        }
    }

    if (const json* snr = rd.field(j, "snr_db", "snr_db", false)) {
        if (snr->is_array()) {
            for (std::size_t i = 0; i < snr->size(); ++i) {
                if (!(*snr)[i].is_number()) {
                    rd.fail("snr_db[" + std::to_string(i) + "]", "expected a number");
                } else {
                    s.snr_db.push_back((*snr)[i].get<double>());
                }
            }
        } else if (auto g = rd.grid(j, "snr_db", "snr_db")) {
            s.snr_db = g->values();
        }
    }
    if (auto m = rd.number(j, "mse_db", "mse_db", false)) s.mse_db = *m;

    if (const json* b = rd.field(j, "ber", "ber", false)) {
        rd.unknown_keys(*b, {"symbols_per_realization", "min_errors", "min_realizations", "batch"}, "ber");
        if (auto v = rd.integer(*b, "symbols_per_realization", "ber.symbols_per_realization", false))
            s.ber.symbols_per_realization = *v;
        if (auto v = rd.integer(*b, "min_errors", "ber.min_errors", false)) s.ber.min_errors = *v;
        if (auto v = rd.integer(*b, "min_realizations", "ber.min_realizations", false)) s.ber.min_realizations = *v;
        if (auto v = rd.integer(*b, "batch", "ber.batch", false)) s.ber.batch = *v;
    }
    if (auto v = rd.integer(j, "export_llr_symbols", "export_llr_symbols", false)) s.ber.export_llr_symbols = *v;
    if (auto g = rd.grid(j, "ccdf_grid_db", "ccdf_grid_db")) s.ccdf_grid = *g;
    if (auto g = rd.grid(j, "psd_grid_sc", "psd_grid_sc")) s.psd_grid = *g;

    auto issues = std::move(rd.issues);
    for (auto& extra : validate(s)) {
        const bool seen = std::any_of(issues.begin(), issues.end(), [&](const ValidationIssue& i) {
            return extra.path.rfind(i.path, 0) == 0 || i.path.rfind(extra.path, 0) == 0;
        });
        if (!seen) issues.push_back(std::move(extra));
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));
    s.echo = echo_json(s).dump(2);
    return s;
}

std::vector<ValidationIssue> validate(const Scenario& s)
{
    std::vector<ValidationIssue> out;
    auto fail = [&](std::string path, std::string msg) { out.push_back({std::move(path), std::move(msg)}); };

    if (s.trials < 1) fail("trials", "must be at least 1");
    const auto& o = s.ofdm;
    if (o.n_sc < 1) fail("ofdm.n_sc", "must be positive");
    if (o.n_fft < 1) fail("ofdm.n_fft", "must be positive");
    if (o.n_sc > o.n_fft) fail("ofdm.n_sc", "must not exceed n_fft");
    if (o.n_cp < 0) fail("ofdm.n_cp", "must be non-negative");
    if (o.n_cp >= o.n_fft) fail("ofdm.n_cp", "must be smaller than n_fft");
    if (!(o.scs_hz > 0.0)) fail("ofdm.scs_hz", "must be positive");
    if (s.curves.empty()) fail("curves", "at least one curve is required");

    for (std::size_t i = 0; i < s.curves.size(); ++i) {
        const auto& c = s.curves[i];
        const std::string path = "curves[" + std::to_string(i) + "]";
        if (c.beta_db > 0.0) fail(path + ".beta_db", "FDSS ripple must be <= 0 dB");
        if (c.scheme != Scheme::Qpsk && o.n_sc % 2 != 0) {
            fail("ofdm.n_sc", "must be even for " + std::string(to_string(c.scheme)) + " (" + path +
                                  "): the scheme requires an even subcarrier count, got " + std::to_string(o.n_sc));
        }
    }

    if (is_link(s.experiment)) {
        if (s.snr_db.empty()) fail("snr_db", "at least one SNR point is required");
        if (s.equalizers.empty()) fail("equalizers", "at least one equalizer is required");
        if (!(s.doppler_hz >= 0.0)) fail("channel.doppler_hz", "must be non-negative");
        if (s.delay_scaling_s && !(*s.delay_scaling_s >= 0.0)) fail("channel.delay_scaling_s", "must be non-negative");
        if (std::isfinite(s.mse_db) && s.experiment != Experiment::UncodedBer) {
            fail("mse_db", "channel-estimate error is only supported by uncoded_ber");
        }
        try {
            const auto profile = load_profile(s.channel, s.delay_scaling_s);
            if (o.n_sc >= 1 && o.n_fft >= 1 && o.scs_hz > 0.0) {
                const double fs = static_cast<double>(o.n_fft) * o.scs_hz;
                for (const double d : profile.delays_s) {
                    const auto samples = std::llround(d * fs);
                    if (samples > 0 && samples >= std::max<long long>(o.n_cp, 1)) {
                        fail("channel.profile", "tap delay of " + std::to_string(samples) +
                                                    " samples is not covered by ofdm.n_cp = " + std::to_string(o.n_cp));
                        break;
                    }
                }
            }
        } catch (const DomainError& e) {
            fail("channel.profile", e.what());
        }
    }
    if (s.experiment == Experiment::UncodedBer) {
        if (s.ber.symbols_per_realization < 1) fail("ber.symbols_per_realization", "must be positive");
        if (s.ber.min_errors < 0) fail("ber.min_errors", "must be non-negative");
        if (s.ber.min_realizations < 1) fail("ber.min_realizations", "must be positive");
        if (s.ber.batch < 1) fail("ber.batch", "must be positive");
        if (s.ber.export_llr_symbols < 0) fail("export_llr_symbols", "must be non-negative");
        if (s.ber.export_llr_symbols > s.ber.symbols_per_realization) {
            fail("export_llr_symbols", "cannot exceed ber.symbols_per_realization");
        }
    }
    return out;
}

std::vector<std::string> bundled_scenario_names()
{
    std::vector<std::string> names;
    for (const auto& [k, _] : bundled()) names.push_back(k);
    return names;
}

const std::string& bundled_scenario_text(const std::string& name)
{
    const auto& t = bundled();
    auto it = t.find(name);
    if (it == t.end()) throw DomainError("unknown scenario '" + name + "'");
    return it->second;
}

Scenario load_scenario(const std::string& name_or_path)
{
    if (bundled().count(name_or_path)) return parse_scenario(bundled_scenario_text(name_or_path));
    if (!std::filesystem::exists(name_or_path)) {
        throw DomainError("unknown scenario '" + name_or_path + "' (not a bundled name or an existing file)");
    }
    std::ifstream in(name_or_path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

RunSummary run(Scenario s, const RunOptions& opts)
{
    const auto t0 = std::chrono::steady_clock::now();
    if (opts.seed) s.seed = *opts.seed;
    if (opts.trials) s.trials = *opts.trials;
    if (auto issues = validate(s); !issues.empty()) throw ValidationError(issues);
    s.echo = echo_json(s).dump(2);

    std::filesystem::create_directories(opts.out_dir);
    RunSummary summary;
    const int threads = std::max(1, opts.threads);
    const auto seed = s.seed;
    const auto& o = s.ofdm;

    switch (s.experiment) {
    case Experiment::PaprCcdf: {
        CsvFile csv(opts.out_dir / "papr_ccdf.csv", kSpectrumHeader);
        for (std::size_t ci = 0; ci < s.curves.size(); ++ci) {
            const auto& c = s.curves[ci];
            const auto tx = TxChain::make(c.scheme, c.beta_db, o);
            const auto samples = papr_samples(tx, static_cast<std::size_t>(s.trials), seed, threads);
            for (const auto& p : ccdf_on_grid(samples, s.ccdf_grid.start, s.ccdf_grid.stop, s.ccdf_grid.step)) {
                csv.row(p.papr_db, p.ccdf, c.label(), c.beta_db, o.n_sc, o.n_fft, seed);
            }
            summary.metrics.emplace_back(c.label() + " papr_db@1e-3", ccdf_readout(samples, 1e-3));
        }
        summary.files.push_back(csv.path());
        break;
    }
    case Experiment::OobPsd: {
        CsvFile csv(opts.out_dir / "psd.csv", kSpectrumHeader);
        for (const auto& c : s.curves) {
            const auto tx = TxChain::make(c.scheme, c.beta_db, o);
            for (const auto& p : psd_curve(tx, s.psd_grid.start, s.psd_grid.stop, s.psd_grid.step)) {
                csv.row(p.freq_sc, p.psd_db, c.label(), c.beta_db, o.n_sc, o.n_fft, seed);
            }
        }
        summary.files.push_back(csv.path());
        break;
    }
    case Experiment::UncodedBer: {
        const auto profile = load_profile(s.channel, s.delay_scaling_s);
        summary.warnings = profile.warnings;
        CsvFile mc(opts.out_dir / "ber.csv", kCurveHeader);
        CsvFile theory(opts.out_dir / "ber_theory.csv", kCurveHeader);
        CsvFile detail(opts.out_dir / "ber_detail.csv",
                       "snr_db,scheme,channel,equalizer,seed,n_realizations,bit_errors,bits,ber_mc,ber_theory,"
                       "se_mc,se_diff,singular_resamples");
        std::optional<CsvFile> llr_csv;
        if (s.ber.export_llr_symbols > 0) {
            llr_csv.emplace(opts.out_dir / "llrs.csv", "snr_db,scheme,equalizer,symbol,bit_index,bit,llr");
        }
        BerOptions bo = s.ber;
        bo.max_realizations = s.trials;
        for (const auto eq : s.equalizers) {
            for (const auto& c : s.curves) {
                const auto link = make_link(s, c, eq, profile);
                for (const double snr : s.snr_db) {
                    const auto pt = ber_point(link, snr, bo, seed, threads);
                    const std::string_view eqs = to_string(eq);
                    mc.row(snr, pt.ber_mc, c.label(), s.channel, eqs, seed, pt.realizations);
                    theory.row(snr, pt.ber_theory, c.label(), s.channel, eqs, seed, pt.realizations);
                    detail.row(snr, c.label(), s.channel, eqs, seed, pt.realizations, pt.bit_errors, pt.bits,
                               pt.ber_mc, pt.ber_theory, pt.se_mc, pt.se_diff, pt.singular_resamples);
                    summary.singular_resamples += pt.singular_resamples;
                    if (pt.bit_errors < s.ber.min_errors) {
                        summary.warnings.push_back(c.label() + "/" + std::string(eqs) + " at " + fmt(snr) +
                                                   " dB stopped at the trial cap with " +
                                                   std::to_string(pt.bit_errors) + " errors");
                    }
                    if (llr_csv) {
                        for (const auto& l : pt.llrs) {
                            llr_csv->row(snr, c.label(), eqs, l.symbol, l.bit_index, l.bit, l.llr);
                        }
                    }
                }
            }
        }
        summary.files.push_back(mc.path());
        summary.files.push_back(theory.path());
        summary.files.push_back(detail.path());
        if (llr_csv) summary.files.push_back(llr_csv->path());
        break;
    }
    case Experiment::Capacity:
    case Experiment::SinrTable: {
        const auto profile = load_profile(s.channel, s.delay_scaling_s);
        summary.warnings = profile.warnings;
        const bool cap = s.experiment == Experiment::Capacity;
        CsvFile csv(opts.out_dir / (cap ? "capacity.csv" : "sinr.csv"), kCurveHeader);
        for (const auto eq : s.equalizers) {
            for (const auto& c : s.curves) {
                const auto link = make_link(s, c, eq, profile);
                const auto curve = cap ? capacity_curve(link, s.snr_db, s.trials, seed, threads)
                                       : sinr_curve(link, s.snr_db, s.trials, seed, threads);
                for (const auto& p : curve) {
                    csv.row(p.snr_db, p.value, c.label(), s.channel, to_string(eq), seed, s.trials);
                }
            }
        }
        summary.files.push_back(csv.path());
        break;
    }
    }

    summary.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json manifest;
    manifest["scenario"] = json::parse(s.echo);
    manifest["seed"] = seed;
    manifest["library_version"] = LOWPAPR_VERSION;
    manifest["csv_schema_version"] = kCsvSchemaVersion;
    manifest["threads"] = threads;
    manifest["wall_time_s"] = summary.wall_time_s;
    manifest["files"] = json::array();
    for (const auto& f : summary.files) manifest["files"].push_back(f.filename().string());
    manifest["warnings"] = summary.warnings;
    manifest["singular_resamples"] = summary.singular_resamples;
    manifest["metrics"] = json::object();
    for (const auto& [k, v] : summary.metrics) manifest["metrics"][k] = v;

    const auto manifest_path = opts.out_dir / "manifest.json";
    std::ofstream(manifest_path) << manifest.dump(2) << '\n';
    summary.files.push_back(manifest_path);
    return summary;
}

}  // namespace lowpapr
