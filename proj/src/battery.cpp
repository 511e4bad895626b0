#include "bess/battery.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bess {

namespace {

Eigen::Index bracket(const Array& axis, double x, double& frac) {
    const Eigen::Index n = axis.size();
    if (n == 1 || x <= axis[0]) {
        frac = 0.0;
        return 0;
    }
    if (x >= axis[n - 1]) {
        frac = 1.0;
        return n - 2;
    }
    Eigen::Index i = 0;
    while (i + 2 < n && x > axis[i + 1]) ++i;
    frac = (x - axis[i]) / (axis[i + 1] - axis[i]);
    return i;
}

}  // namespace

double& EfficiencyTable::cell(Eigen::Index i, Eigen::Index j, Eigen::Index k) {
    return values[static_cast<std::size_t>((i * c_rate_axis.size() + j) * temp_axis.size() + k)];
}

double EfficiencyTable::at(double soc, double c_rate, double temp_c) const {
    double fs, fc, ft;
    const Eigen::Index is = bracket(soc_axis, soc, fs);
    const Eigen::Index ic = bracket(c_rate_axis, c_rate, fc);
    const Eigen::Index it = bracket(temp_axis, temp_c, ft);
    const Eigen::Index nc = c_rate_axis.size();
    const Eigen::Index nt = temp_axis.size();
    auto v = [&](Eigen::Index a, Eigen::Index b, Eigen::Index c) {
        a = std::min(a, soc_axis.size() - 1);
        b = std::min(b, nc - 1);
        c = std::min(c, nt - 1);
        return values[static_cast<std::size_t>((a * nc + b) * nt + c)];
    };
    double out = 0.0;
    for (int da = 0; da < 2; ++da) {
        for (int db = 0; db < 2; ++db) {
            for (int dc = 0; dc < 2; ++dc) {
                const double w = (da ? fs : 1.0 - fs) * (db ? fc : 1.0 - fc) *
                                 (dc ? ft : 1.0 - ft);
                if (w != 0.0) out += w * v(is + da, ic + db, it + dc);
            }
        }
    }
    return out;
}

EfficiencyTable default_efficiency_table() {
    EfficiencyTable t;
    t.soc_axis = Array{{0.0, 0.5, 1.0}};
    t.c_rate_axis = Array{{0.0, 0.25, 0.5, 1.0, 2.0}};
    t.temp_axis = Array{{0.0, 25.0, 40.0}};
    t.values.assign(static_cast<std::size_t>(t.soc_axis.size() * t.c_rate_axis.size() *
                                             t.temp_axis.size()),
                    0.0);
    // Loss grows linearly with C-rate, is a little worse at low SOC (lower
    // OCV, higher current for the same power) and in the cold.
    const OcvCurve ocv = default_ocv_curve();
    const double v_nom = ocv.at(0.5);
    for (Eigen::Index i = 0; i < t.soc_axis.size(); ++i) {
        const double soc_mult = std::pow(v_nom / ocv.at(std::max(0.1, t.soc_axis[i])), 2.0);
        for (Eigen::Index j = 0; j < t.c_rate_axis.size(); ++j) {
            for (Eigen::Index k = 0; k < t.temp_axis.size(); ++k) {
                const double temp_c = t.temp_axis[k];
                const double temp_mult =
                    temp_c < 25.0 ? 1.0 + 0.006 * (25.0 - temp_c) : 1.0 - 0.002 * (temp_c - 25.0);
                const double loss = 0.1626 * t.c_rate_axis[j] * soc_mult * temp_mult;
                t.cell(i, j, k) = std::max(0.5, 1.0 - loss);
            }
        }
    }
    return t;
}

EfficiencyTable load_efficiency_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);  // header
    std::set<double> socs, rates, temps;
    std::map<std::tuple<double, double, double>, double> pts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double s, c, t, e;
        char comma;
        if (!(ss >> s >> comma >> c >> comma >> t >> comma >> e)) {
            throw std::runtime_error(path + ": expected 'soc,c_rate,temp_c,efficiency'");
        }
        socs.insert(s);
        rates.insert(c);
        temps.insert(t);
        pts[{s, c, t}] = e;
    }
    EfficiencyTable tab;
    auto to_array = [](const std::set<double>& s) {
        Array a(static_cast<Eigen::Index>(s.size()));
        Eigen::Index i = 0;
        for (double v : s) a[i++] = v;
        return a;
    };
    tab.soc_axis = to_array(socs);
    tab.c_rate_axis = to_array(rates);
    tab.temp_axis = to_array(temps);
    tab.values.resize(socs.size() * rates.size() * temps.size());
    for (Eigen::Index i = 0; i < tab.soc_axis.size(); ++i)
        for (Eigen::Index j = 0; j < tab.c_rate_axis.size(); ++j)
            for (Eigen::Index k = 0; k < tab.temp_axis.size(); ++k) {
                auto it = pts.find({tab.soc_axis[i], tab.c_rate_axis[j], tab.temp_axis[k]});
                if (it == pts.end())
                    throw std::runtime_error(path + ": efficiency grid is incomplete");
                tab.cell(i, j, k) = it->second;
            }
    return tab;
}

double OcvCurve::at(double soc) const {
    double f;
    const Eigen::Index i = bracket(soc_axis, soc, f);
    return volts[i] + f * (volts[i + 1] - volts[i]);
}

OcvCurve default_ocv_curve() {
    OcvCurve c;
    c.soc_axis = Array{{0.0, 0.10, 0.25, 0.50, 0.75, 0.90, 1.0}};
    c.volts = Array{{3.00, 3.45, 3.55, 3.65, 3.80, 3.95, 4.10}};
    return c;
}

OcvCurve load_ocv_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);
    std::vector<double> socs, volts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double s, v;
        char comma;
        if (!(ss >> s >> comma >> v))
            throw std::runtime_error(path + ": expected 'soc,voltage'");
        if (!socs.empty() && s <= socs.back())
            throw std::runtime_error(path + ": soc axis must be strictly increasing");
        socs.push_back(s);
        volts.push_back(v);
    }
    if (socs.size() < 2) throw std::runtime_error(path + ": need at least two points");
    OcvCurve c;
    c.soc_axis = Eigen::Map<const Array>(socs.data(), static_cast<Eigen::Index>(socs.size()));
    c.volts = Eigen::Map<const Array>(volts.data(), static_cast<Eigen::Index>(volts.size()));
    return c;
}

void BatterySpec::validate() const {
    if (module_kwh <= 0.0) throw std::invalid_argument("module_kwh must be > 0");
    if (n_modules < 1) throw std::invalid_argument("n_modules must be >= 1");
    if (eta_charge <= 0.0 || eta_charge > 1.0 || eta_discharge <= 0.0 ||
        eta_discharge > 1.0) {
        throw std::invalid_argument("battery efficiencies must be in (0,1]");
    }
    if (!(soc_min >= 0.0 && soc_min < soc_max && soc_max <= 1.0)) {
        throw std::invalid_argument("require 0 <= soc_min < soc_max <= 1");
    }
}

BatteryState initial_state(const BatterySpec& spec, double soc0) {
    BatteryState st;
    st.soc = std::clamp(soc0, spec.soc_min, spec.soc_max);
    st.rated_kwh = spec.rated_kwh();
    return st;
}

double min_rated_capacity(double useful_kwh, double dod, double max_fade) {
    if (dod <= 0.0 || dod > 1.0) throw std::invalid_argument("dod must be in (0,1]");
    if (max_fade < 0.0 || max_fade >= 1.0)
        throw std::invalid_argument("max_fade must be in [0,1)");
    return useful_kwh / (dod * (1.0 - max_fade));
}

namespace {

// Table mode shares one symmetric table; caching the default avoids
// rebuilding it every step.
const EfficiencyTable& table_for(const BatterySpec& spec) {
    static const EfficiencyTable fallback = default_efficiency_table();
    return spec.efficiency_table ? *spec.efficiency_table : fallback;
}

void one_way_etas(const BatterySpec& spec, double soc, double p_kw, double& eta_c,
                  double& eta_d) {
    switch (spec.efficiency_mode) {
        case EfficiencyMode::constant:
            eta_c = eta_d = spec.constant_efficiency;
            return;
        case EfficiencyMode::table: {
            const double c_rate = std::abs(p_kw) / spec.rated_kwh();
            eta_c = eta_d = table_for(spec).at(soc, c_rate, spec.temperature_c);
            return;
        }
        case EfficiencyMode::fixed:
        default:
            eta_c = spec.eta_charge;
            eta_d = spec.eta_discharge;
            return;
    }
}

}  // namespace

double efficiency_lookup(const BatterySpec& spec, double soc, double c_rate,
                         double temp_c) {
    switch (spec.efficiency_mode) {
        case EfficiencyMode::constant:
            return spec.constant_efficiency;
        case EfficiencyMode::table:
            return table_for(spec).at(soc, c_rate, temp_c);
        case EfficiencyMode::fixed:
        default:
            return spec.eta_charge;
    }
}

StepResult ep_step(const BatteryState& state, const BatterySpec& spec,
                   double p_request_kw, double dt_hours) {
    if (dt_hours <= 0.0) throw std::invalid_argument("dt must be > 0");
    StepResult r{state, 0.0, 0.0, 0.0, 1.0};
    if (p_request_kw == 0.0) return r;

    const double cap = state.usable_kwh();
    double eta_c, eta_d;
    one_way_etas(spec, state.soc, p_request_kw, eta_c, eta_d);

    if (p_request_kw > 0.0) {
        const double headroom = std::max(0.0, (spec.soc_max - state.soc) * cap);
        double stored = p_request_kw * dt_hours * eta_c;
        double p = p_request_kw;
        if (stored > headroom) {
            stored = headroom;
            p = stored / (dt_hours * eta_c);
        }
        r.state.soc += cap > 0.0 ? stored / cap : 0.0;
        r.state.throughput_kwh += stored;
        r.p_actual_kw = p;
        r.loss_kw = p - stored / dt_hours;
        r.eta_weight_kwh = stored;
        r.eta_value = eta_c;
    } else {
        const double available = std::max(0.0, (state.soc - spec.soc_min) * cap);
        double stored = -p_request_kw * dt_hours / eta_d;  // drawn from the cells
        double p = p_request_kw;
        if (stored > available) {
            stored = available;
            p = -stored * eta_d / dt_hours;
        }
        r.state.soc -= cap > 0.0 ? stored / cap : 0.0;
        r.state.throughput_kwh += stored;
        r.p_actual_kw = p;
        r.loss_kw = stored / dt_hours + p;  // stored rate minus |p|
        r.eta_weight_kwh = stored;
        r.eta_value = eta_d;
    }
    r.state.soc = std::clamp(r.state.soc, spec.soc_min, spec.soc_max);
    return r;
}

StepResult ec_step(const BatteryState& state, const BatterySpec& spec,
                   double p_request_kw, double dt_hours) {
    if (!spec.ec) throw std::invalid_argument("ec_step requires ec parameters");
    if (dt_hours <= 0.0) throw std::invalid_argument("dt must be > 0");
    StepResult r{state, 0.0, 0.0, 0.0, 1.0};
    if (p_request_kw == 0.0) return r;

    const EcParams& ec = *spec.ec;
    const int series = ec.series_cells;
    const double u = series * ec.ocv.at(state.soc);              // pack OCV, V
    const double res = ec.internal_resistance_ohm * series / spec.strings();
    const double v_max = series * ec.ocv.volts[ec.ocv.volts.size() - 1];
    const double v_min = series * ec.ocv.volts[0];
    const double cap = state.usable_kwh();
    const double p_w = p_request_kw * 1000.0;

    double current;  // A, positive while charging
    if (p_request_kw > 0.0) {
        if (res > 0.0) {
            current = (-u + std::sqrt(u * u + 4.0 * res * p_w)) / (2.0 * res);
            current = std::min(current, std::max(0.0, (v_max - u) / res));
        } else {
            current = p_w / u;
        }
        const double headroom_wh = std::max(0.0, (spec.soc_max - state.soc) * cap) * 1000.0;
        current = std::min(current, headroom_wh / (dt_hours * u));
        const double stored_kw = u * current / 1000.0;
        const double loss_kw = current * current * res / 1000.0;
        r.p_actual_kw = stored_kw + loss_kw;
        r.loss_kw = loss_kw;
        r.state.soc += cap > 0.0 ? stored_kw * dt_hours / cap : 0.0;
        r.state.throughput_kwh += stored_kw * dt_hours;
        r.eta_weight_kwh = stored_kw * dt_hours;
        r.eta_value = r.p_actual_kw > 0.0 ? stored_kw / r.p_actual_kw : 1.0;
    } else {
        const double p_mag = -p_w;
        if (res > 0.0) {
            const double disc = u * u - 4.0 * res * p_mag;
            current = disc >= 0.0 ? (u - std::sqrt(disc)) / (2.0 * res) : u / (2.0 * res);
            current = std::min(current, (u - v_min) / res);
        } else {
            current = p_mag / u;
        }
        const double avail_wh = std::max(0.0, (state.soc - spec.soc_min) * cap) * 1000.0;
        current = std::min(current, avail_wh / (dt_hours * u));
        const double stored_kw = u * current / 1000.0;  // drawn at the cell boundary
        const double loss_kw = current * current * res / 1000.0;
        r.p_actual_kw = -(stored_kw - loss_kw);
        r.loss_kw = loss_kw;
        r.state.soc -= cap > 0.0 ? stored_kw * dt_hours / cap : 0.0;
        r.state.throughput_kwh += stored_kw * dt_hours;
        r.eta_weight_kwh = stored_kw * dt_hours;
        r.eta_value = stored_kw > 0.0 ? -r.p_actual_kw / stored_kw : 1.0;
    }
    r.state.soc = std::clamp(r.state.soc, spec.soc_min, spec.soc_max);
    return r;
}

StepResult battery_step(BatteryModelKind kind, const BatteryState& state,
                        const BatterySpec& spec, double p_request_kw,
                        double dt_hours) {
    return kind == BatteryModelKind::ec ? ec_step(state, spec, p_request_kw, dt_hours)
                                        : ep_step(state, spec, p_request_kw, dt_hours);
}

double max_charge_kw(BatteryModelKind kind, const BatteryState& state,
                     const BatterySpec& spec, double dt_hours) {
    const double cap = state.usable_kwh();
    const double headroom = std::max(0.0, (spec.soc_max - state.soc) * cap);
    if (kind == BatteryModelKind::ep) {
        double eta_c, eta_d, p = headroom / dt_hours;
        one_way_etas(spec, state.soc, p, eta_c, eta_d);
        p = headroom / (dt_hours * eta_c);
        one_way_etas(spec, state.soc, p, eta_c, eta_d);
        return headroom / (dt_hours * eta_c);
    }
    const EcParams& ec = *spec.ec;
    const int series = ec.series_cells;
    const double u = series * ec.ocv.at(state.soc);
    const double res = ec.internal_resistance_ohm * series / spec.strings();
    double i = headroom * 1000.0 / (dt_hours * u);
    if (res > 0.0) {
        const double v_max = series * ec.ocv.volts[ec.ocv.volts.size() - 1];
        i = std::min(i, std::max(0.0, (v_max - u) / res));
    }
    return (u * i + i * i * res) / 1000.0;
}

double max_discharge_kw(BatteryModelKind kind, const BatteryState& state,
                        const BatterySpec& spec, double dt_hours) {
    const double cap = state.usable_kwh();
    const double avail = std::max(0.0, (state.soc - spec.soc_min) * cap);
    if (kind == BatteryModelKind::ep) {
        double eta_c, eta_d, p = avail / dt_hours;
        one_way_etas(spec, state.soc, p, eta_c, eta_d);
        p = avail * eta_d / dt_hours;
        one_way_etas(spec, state.soc, p, eta_c, eta_d);
        return avail * eta_d / dt_hours;
    }
    const EcParams& ec = *spec.ec;
    const int series = ec.series_cells;
    const double u = series * ec.ocv.at(state.soc);
    const double res = ec.internal_resistance_ohm * series / spec.strings();
    double i = avail * 1000.0 / (dt_hours * u);
    if (res > 0.0) {
        const double v_min = series * ec.ocv.volts[0];
        i = std::min(i, std::min(u / (2.0 * res), (u - v_min) / res));
    }
    return std::max(0.0, (u * i - i * i * res) / 1000.0);
}

BatteryState age_update(const BatteryState& state, const BatterySpec& spec,
                        double dt_years, double efc_increment) {
    if (dt_years < 0.0 || efc_increment < 0.0) {
        throw std::invalid_argument("age_update requires nonnegative increments");
    }
    BatteryState st = state;
    st.age_years += dt_years;
    if (!spec.ageing.enabled) return st;
    st.soh -= spec.ageing.calendar_fade_per_year * dt_years +
              spec.ageing.cycle_fade_per_efc * efc_increment;
    if (st.soh <= kReplacementSoh) {
        st.soh = 1.0;
        st.replacements += 1;
    }
    return st;
}

}  // namespace bess
