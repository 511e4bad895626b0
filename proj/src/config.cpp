#include "bess/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <variant>

#include "json.hpp"

namespace bess {

namespace {

using Value = std::variant<double, bool, std::string, std::vector<double>,
                           std::vector<std::string>>;

struct Entry {
    Value value;
    int line = 0;  // 0 when the source format has no line tracking
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Document flattened to "section.key" entries plus consumption tracking so
// that anything never read is reported as unknown.
class Document {
  public:
    Document(std::string path) : path_(std::move(path)) {}

    std::string where(const Entry& e) const {
        return e.line > 0 ? path_ + ":" + std::to_string(e.line) : path_;
    }
    std::string where(const std::string& key) const {
        const auto it = entries_.find(key);
        return it != entries_.end() ? where(it->second) : path_;
    }

    void insert(const std::string& key, Value v, int line) {
        const auto [it, fresh] = entries_.emplace(key, Entry{std::move(v), line});
        if (!fresh) {
            throw ConfigError(path_ + ":" + std::to_string(line) + ": duplicate key '" + key +
                              "' (first set at line " + std::to_string(it->second.line) + ")");
        }
    }

    template <typename T>
    std::optional<T> get(const std::string& key, const char* type_name) {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        consumed_.insert(key);
        if (const T* v = std::get_if<T>(&it->second.value)) return *v;
        throw ConfigError(where(it->second) + ": key '" + key + "' must be " + type_name);
    }

    std::optional<double> number(const std::string& key) { return get<double>(key, "a number"); }
    std::optional<bool> boolean(const std::string& key) { return get<bool>(key, "a boolean"); }
    std::optional<std::string> text(const std::string& key) {
        return get<std::string>(key, "a string");
    }
    std::optional<std::vector<double>> numbers(const std::string& key) {
        return get<std::vector<double>>(key, "an array of numbers");
    }

    double number_or(const std::string& key, double fallback) {
        return number(key).value_or(fallback);
    }
    bool boolean_or(const std::string& key, bool fallback) {
        return boolean(key).value_or(fallback);
    }
    int integer_or(const std::string& key, int fallback) {
        const auto v = number(key);
        if (!v) return fallback;
        const double r = std::round(*v);
        if (std::abs(*v - r) > 1e-9) {
            throw ConfigError(where(key) + ": key '" + key + "' must be an integer");
        }
        return static_cast<int>(r);
    }

    bool has_prefix(const std::string& prefix) const {
        const auto it = entries_.lower_bound(prefix + ".");
        return it != entries_.end() && it->first.rfind(prefix + ".", 0) == 0;
    }

    // Chooses the value from a fixed vocabulary, mapping to enum handled by
    // the caller; unknown values list the alternatives.
    std::string choice(const std::string& key, const std::string& fallback,
                       std::initializer_list<const char*> allowed) {
        const auto v = text(key);
        const std::string got = v.value_or(fallback);
        for (const char* a : allowed) {
            if (got == a) return got;
        }
        std::string list;
        for (const char* a : allowed) {
            if (!list.empty()) list += ", ";
            list += a;
        }
        throw ConfigError(where(key) + ": key '" + key + "' must be one of {" + list +
                          "}, got '" + got + "'");
    }

    void finish() const {
        for (const auto& [key, entry] : entries_) {
            if (consumed_.count(key) == 0) {
                throw ConfigError(where(entry) + ": unknown key '" + key + "'");
            }
        }
    }

    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::map<std::string, Entry> entries_;
    std::set<std::string> consumed_;
};

bool looks_numeric(const std::string& t) {
    return !t.empty() && (std::isdigit(static_cast<unsigned char>(t[0])) || t[0] == '-' ||
                          t[0] == '+' || t[0] == '.');
}

Value parse_scalar(const std::string& token, const std::string& context) {
    if (token.size() >= 2 && (token.front() == '"' || token.front() == '\'')) {
        if (token.back() != token.front()) {
            throw ConfigError(context + ": unterminated string " + token);
        }
        return token.substr(1, token.size() - 2);
    }
    if (token == "true") return true;
    if (token == "false") return false;
    if (looks_numeric(token)) {
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (end == token.c_str() + token.size()) return v;
    }
    throw ConfigError(context + ": cannot parse value '" + token + "'");
}

std::vector<std::string> split_top_level(const std::string& body, const std::string& context) {
    std::vector<std::string> parts;
    std::string current;
    bool in_string = false;
    char quote = 0;
    for (char c : body) {
        if (in_string) {
            current += c;
            if (c == quote) in_string = false;
            continue;
        }
        if (c == '"' || c == '\'') {
            in_string = true;
            quote = c;
            current += c;
        } else if (c == ',') {
            parts.push_back(trim(current));
            current.clear();
        } else if (c == '[' || c == ']') {
            throw ConfigError(context + ": nested arrays are not supported");
        } else {
            current += c;
        }
    }
    if (in_string) throw ConfigError(context + ": unterminated string");
    const std::string last = trim(current);
    if (!last.empty()) parts.push_back(last);
    return parts;
}

Value parse_array(const std::string& body, const std::string& context) {
    const std::vector<std::string> parts = split_top_level(body, context);
    if (parts.empty()) return std::vector<double>{};
    std::vector<double> nums;
    std::vector<std::string> strs;
    for (const std::string& p : parts) {
        Value v = parse_scalar(p, context);
        if (const double* d = std::get_if<double>(&v)) {
            nums.push_back(*d);
        } else if (const std::string* s = std::get_if<std::string>(&v)) {
            strs.push_back(*s);
        } else {
            throw ConfigError(context + ": arrays may hold numbers or strings only");
        }
    }
    if (!nums.empty() && !strs.empty()) {
        throw ConfigError(context + ": arrays must be homogeneous");
    }
    if (!strs.empty()) return strs;
    return nums;
}

// Strips a trailing comment, respecting quotes.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_string) {
            if (c == quote) in_string = false;
        } else if (c == '"' || c == '\'') {
            in_string = true;
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    }
    return true;
}

void parse_toml_like(std::istream& in, Document& doc) {
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        const std::string context = doc.path() + ":" + std::to_string(line_no);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(context + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError(context + ": empty section name");
            for (char c : section) {
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') {
                    throw ConfigError(context + ": malformed section name '" + section + "'");
                }
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(context + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (!valid_key(key)) throw ConfigError(context + ": malformed key '" + key + "'");
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) throw ConfigError(context + ": key '" + key + "' has no value");
        const std::string full = section.empty() ? key : section + "." + key;
        if (value.front() == '[') {
            if (value.back() != ']') {
                throw ConfigError(context + ": arrays must close on the same line");
            }
            doc.insert(full, parse_array(value.substr(1, value.size() - 2), context), line_no);
        } else {
            doc.insert(full, parse_scalar(value, context), line_no);
        }
    }
}

void flatten_json(const nlohmann::json& node, const std::string& prefix, Document& doc) {
    if (node.is_object()) {
        for (const auto& [key, child] : node.items()) {
            flatten_json(child, prefix.empty() ? key : prefix + "." + key, doc);
        }
        return;
    }
    if (node.is_array()) {
        std::vector<double> nums;
        std::vector<std::string> strs;
        for (const auto& child : node) {
            if (child.is_number()) {
                nums.push_back(child.get<double>());
            } else if (child.is_string()) {
                strs.push_back(child.get<std::string>());
            } else {
                throw ConfigError(doc.path() + ": array '" + prefix +
                                  "' may hold numbers or strings only");
            }
        }
        if (!nums.empty() && !strs.empty()) {
            throw ConfigError(doc.path() + ": array '" + prefix + "' must be homogeneous");
        }
        if (!strs.empty()) {
            doc.insert(prefix, strs, 0);
        } else {
            doc.insert(prefix, nums, 0);
        }
        return;
    }
    if (node.is_boolean()) {
        doc.insert(prefix, node.get<bool>(), 0);
    } else if (node.is_number()) {
        doc.insert(prefix, node.get<double>(), 0);
    } else if (node.is_string()) {
        doc.insert(prefix, node.get<std::string>(), 0);
    } else {
        throw ConfigError(doc.path() + ": key '" + prefix + "' has an unsupported type");
    }
}

std::string resolve_path(const std::string& config_path, const std::string& rel) {
    const std::filesystem::path p(rel);
    if (p.is_absolute()) return rel;
    return (std::filesystem::path(config_path).parent_path() / p).string();
}

ForecastBaseline baseline_from(const std::string& name) {
    if (name == "perfect") return ForecastBaseline::perfect;
    if (name == "persistence") return ForecastBaseline::persistence;
    return ForecastBaseline::smoothed;
}

void read_battery(Document& doc, Scenario& sc) {
    BatterySpec& b = sc.system.battery;
    b.module_kwh = doc.number_or("battery.module_kwh", b.module_kwh);
    b.n_modules = doc.integer_or("battery.n_modules", b.n_modules);
    b.soc_min = doc.number_or("battery.soc_min", b.soc_min);
    b.soc_max = doc.number_or("battery.soc_max", b.soc_max);
    b.eta_charge = doc.number_or("battery.eta_charge", b.eta_charge);
    b.eta_discharge = doc.number_or("battery.eta_discharge", b.eta_discharge);
    b.constant_efficiency = doc.number_or("battery.constant_efficiency", b.constant_efficiency);
    b.temperature_c = doc.number_or("battery.temperature_c", b.temperature_c);

    const std::string mode = doc.choice("battery.efficiency_mode", "fixed",
                                        {"fixed", "table", "constant"});
    b.efficiency_mode = mode == "table"    ? EfficiencyMode::table
                        : mode == "constant" ? EfficiencyMode::constant
                                             : EfficiencyMode::fixed;
    if (const auto table = doc.text("battery.efficiency_table_csv")) {
        b.efficiency_table = load_efficiency_table_csv(resolve_path(doc.path(), *table));
    }

    const std::string model = doc.choice("battery.model", "ep", {"ep", "ec"});
    sc.system.battery_model = model == "ec" ? BatteryModelKind::ec : BatteryModelKind::ep;

    AgeingParams& a = b.ageing;
    a.enabled = doc.boolean_or("battery.ageing.enabled", a.enabled);
    a.calendar_fade_per_year =
        doc.number_or("battery.ageing.calendar_fade_per_year", a.calendar_fade_per_year);
    a.cycle_fade_per_efc = doc.number_or("battery.ageing.cycle_fade_per_efc", a.cycle_fade_per_efc);

    if (sc.system.battery_model == BatteryModelKind::ec || doc.has_prefix("battery.ec")) {
        EcParams ec;
        ec.internal_resistance_ohm =
            doc.number_or("battery.ec.internal_resistance_ohm", ec.internal_resistance_ohm);
        ec.series_cells = doc.integer_or("battery.ec.series_cells", ec.series_cells);
        ec.parallel_strings = doc.integer_or("battery.ec.parallel_strings", ec.parallel_strings);
        if (const auto ocv = doc.text("battery.ec.ocv_csv")) {
            ec.ocv = load_ocv_curve_csv(resolve_path(doc.path(), *ocv));
        }
        b.ec = std::move(ec);
    }
}

void read_components(Document& doc, Scenario& sc) {
    PvPlant& pv = sc.system.pv;
    pv.installed_kwp = doc.number_or("components.pv.installed_kwp", pv.installed_kwp);
    pv.annual_degradation =
        doc.number_or("components.pv.annual_degradation", pv.annual_degradation);

    Converter& conv = sc.system.converter;
    conv.rating_kva = doc.number_or("components.converter.rating_kva", conv.rating_kva);
    conv.efficiency = doc.number_or("components.converter.efficiency", conv.efficiency);

    if (doc.has_prefix("components.genset")) {
        Genset g;
        g.rated_kw = doc.number_or("components.genset.rated_kw", g.rated_kw);
        g.min_on_steps = doc.integer_or("components.genset.min_on_steps", g.min_on_steps);
        g.min_off_steps = doc.integer_or("components.genset.min_off_steps", g.min_off_steps);
        const auto fracs = doc.numbers("components.genset.fuel_load_fractions");
        const auto rates = doc.numbers("components.genset.fuel_liters_per_hour");
        if (fracs.has_value() != rates.has_value()) {
            throw ConfigError(doc.where("components.genset.fuel_load_fractions") +
                              ": fuel_load_fractions and fuel_liters_per_hour come as a pair");
        }
        if (fracs) {
            if (fracs->size() != rates->size()) {
                throw ConfigError(doc.where("components.genset.fuel_load_fractions") +
                                  ": fuel curve arrays differ in length");
            }
            g.fuel_points.clear();
            for (std::size_t i = 0; i < fracs->size(); ++i) {
                g.fuel_points.emplace_back((*fracs)[i], (*rates)[i]);
            }
        }
        sc.system.genset = std::move(g);
    }
}

void read_dispatch(Document& doc, Scenario& sc) {
    DispatchConfig& d = sc.system.dispatch;
    const std::string strat = doc.choice("dispatch.strategy", "basic",
                                         {"basic", "optimized", "pv_injection"});
    d.strategy = strat == "optimized"      ? DispatchStrategy::optimized
                 : strat == "pv_injection" ? DispatchStrategy::pv_injection
                                           : DispatchStrategy::basic;
    d.soc_start = doc.number_or("dispatch.soc_start", d.soc_start);
    d.soc_stop = doc.number_or("dispatch.soc_stop", d.soc_stop);
    d.n_soc = doc.integer_or("dispatch.n_soc", d.n_soc);
    d.terminal_slack = doc.number_or("dispatch.terminal_slack", d.terminal_slack);
    d.smoothing_minutes = doc.integer_or("dispatch.smoothing_minutes", d.smoothing_minutes);
    d.ramp_frac_per_minute = doc.number_or("dispatch.ramp_frac_per_minute", d.ramp_frac_per_minute);
    d.peak_start_hour = doc.number_or("dispatch.peak_start_hour", d.peak_start_hour);
    d.peak_end_hour = doc.number_or("dispatch.peak_end_hour", d.peak_end_hour);
    d.peak_fraction = doc.number_or("dispatch.peak_fraction", d.peak_fraction);
    d.tolerance_frac = doc.number_or("dispatch.tolerance_frac", d.tolerance_frac);

    ForecastSpec& f = sc.system.forecast;
    f.pv = baseline_from(doc.choice("forecast.pv", "smoothed",
                                    {"smoothed", "persistence", "perfect"}));
    f.load = baseline_from(doc.choice("forecast.load", "persistence",
                                      {"smoothed", "persistence", "perfect"}));
    f.blend_weight = doc.number_or("forecast.blend_weight", f.blend_weight);
    f.smoothing_minutes = doc.integer_or("forecast.smoothing_minutes", f.smoothing_minutes);
}

void read_economics(Document& doc, Scenario& sc) {
    EconParams& e = sc.econ;
    e.discount_rate = doc.number_or("economics.discount_rate", e.discount_rate);
    e.capex_battery_per_kwh = doc.number_or("economics.capex_battery_per_kwh",
                                            e.capex_battery_per_kwh);
    e.capex_converter_per_kva =
        doc.number_or("economics.capex_converter_per_kva", e.capex_converter_per_kva);
    e.capex_pv_per_kwp = doc.number_or("economics.capex_pv_per_kwp", e.capex_pv_per_kwp);
    e.capex_genset = doc.number_or("economics.capex_genset", e.capex_genset);
    e.opex_frac_of_capex = doc.number_or("economics.opex_frac_of_capex", e.opex_frac_of_capex);
    e.opex_fixed_per_year = doc.number_or("economics.opex_fixed_per_year", e.opex_fixed_per_year);
    e.replacement_battery_per_kwh =
        doc.number_or("economics.replacement_battery_per_kwh", e.replacement_battery_per_kwh);
    e.fuel_price_per_liter = doc.number_or("economics.fuel_price_per_liter",
                                           e.fuel_price_per_liter);
    e.genset_start_cost = doc.number_or("economics.genset_start_cost", e.genset_start_cost);
    e.feed_in_tariff_per_mwh =
        doc.number_or("economics.feed_in_tariff_per_mwh", e.feed_in_tariff_per_mwh);
    e.peak_bonus_per_mwh = doc.number_or("economics.peak_bonus_per_mwh", e.peak_bonus_per_mwh);
    if (const auto pen = doc.number("economics.penalty_per_mwh")) e.penalty_per_mwh = *pen;
}

void read_sizing(Document& doc, Scenario& sc) {
    const std::string ind = doc.choice("sizing.indicator", "lcoe", {"lcoe", "npv", "irr"});
    sc.indicator = indicator_from_name(ind);

    const auto sizes = doc.numbers("sizing.sizes_kwh");
    const auto lo = doc.number("sizing.size_min_kwh");
    const auto hi = doc.number("sizing.size_max_kwh");
    const auto step = doc.number("sizing.size_step_kwh");
    if (sizes && (lo || hi || step)) {
        throw ConfigError(doc.where("sizing.sizes_kwh") +
                          ": give either sizing.sizes_kwh or a min/max/step range, not both");
    }
    if (sizes) {
        sc.sizes_kwh = *sizes;
    } else if (lo || hi || step) {
        if (!(lo && hi && step)) {
            throw ConfigError(doc.path() +
                              ": sizing range needs size_min_kwh, size_max_kwh and size_step_kwh");
        }
        if (*step <= 0.0 || *hi < *lo) {
            throw ConfigError(doc.where("sizing.size_step_kwh") + ": empty sizing range");
        }
        for (double s = *lo; s <= *hi + 1e-9; s += *step) sc.sizes_kwh.push_back(s);
    }
    for (double s : sc.sizes_kwh) {
        if (s <= 0.0) {
            throw ConfigError(doc.where("sizing.sizes_kwh") + ": sizes must be positive");
        }
    }
    if (!std::is_sorted(sc.sizes_kwh.begin(), sc.sizes_kwh.end())) {
        throw ConfigError(doc.where("sizing.sizes_kwh") + ": sizes must be increasing");
    }
}

void read_timeseries(Document& doc, Scenario& sc) {
    const int pv_seed = doc.integer_or("timeseries.pv_seed", 1);
    const int load_seed = doc.integer_or("timeseries.load_seed", 2);

    if (const auto pv_csv = doc.text("timeseries.pv_csv")) {
        sc.system.pv_producible = load_csv_series(resolve_path(doc.path(), *pv_csv), 0);
    } else {
        sc.system.pv_producible =
            synth_profiles(static_cast<std::uint64_t>(pv_seed), kDaysPerYear,
                           SynthKind::pv_producible);
        sc.system.pv_producible.values *= sc.system.pv.installed_kwp;
    }
    if (sc.system.application == Application::microgrid) {
        if (const auto load_csv = doc.text("timeseries.load_csv")) {
            sc.system.load = load_csv_series(resolve_path(doc.path(), *load_csv), 0);
        } else {
            sc.system.load = synth_profiles(static_cast<std::uint64_t>(load_seed), kDaysPerYear,
                                            SynthKind::industrial_load);
        }
    } else if (doc.text("timeseries.load_csv")) {
        throw ConfigError(doc.where("timeseries.load_csv") +
                          ": a grid-injection scenario has no load series");
    }
}

}  // namespace

std::vector<double> parse_size_range(const std::string& text) {
    std::vector<double> bounds;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ':')) {
        part = trim(part);
        char* end = nullptr;
        const double v = std::strtod(part.c_str(), &end);
        if (part.empty() || end != part.c_str() + part.size()) {
            throw ConfigError("size range must be lo:hi:step, got '" + text + "'");
        }
        bounds.push_back(v);
    }
    if (bounds.size() != 3 || bounds[2] <= 0.0 || bounds[1] < bounds[0] || bounds[0] <= 0.0) {
        throw ConfigError("size range must be lo:hi:step with lo > 0, hi >= lo, step > 0, got '" +
                          text + "'");
    }
    std::vector<double> sizes;
    for (double s = bounds[0]; s <= bounds[1] + 1e-9; s += bounds[2]) sizes.push_back(s);
    return sizes;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);

    Document doc(path);
    if (std::filesystem::path(path).extension() == ".json") {
        nlohmann::json root;
        try {
            root = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(path + ": " + e.what());
        }
        if (!root.is_object()) throw ConfigError(path + ": top level must be an object");
        flatten_json(root, "", doc);
    } else {
        parse_toml_like(in, doc);
    }

    Scenario sc;
    const std::string app = doc.choice("application.kind", "microgrid",
                                       {"microgrid", "pv_injection"});
    sc.system.application =
        app == "pv_injection" ? Application::pv_injection : Application::microgrid;

    sc.system.step_minutes = doc.integer_or("simulation.step_minutes", sc.system.step_minutes);
    sc.system.lifetime_years =
        doc.integer_or("simulation.lifetime_years", sc.system.lifetime_years);

    read_components(doc, sc);
    read_battery(doc, sc);
    read_dispatch(doc, sc);
    read_economics(doc, sc);
    read_sizing(doc, sc);
    read_timeseries(doc, sc);
    doc.finish();

    // The planner prices fuel and starts with the same numbers the economics
    // module bills, whatever the genset defaults say.
    if (sc.system.genset) {
        sc.system.genset->fuel_price_per_liter = sc.econ.fuel_price_per_liter;
        sc.system.genset->start_cost = sc.econ.genset_start_cost;
    }

    try {
        sc.econ.validate();
        sc.system.validate();
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return sc;
}

}  // namespace bess
