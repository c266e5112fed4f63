#include "invergrid/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

namespace invergrid {

ConfigError::ConfigError(int line, std::string key, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + "'" + key +
                         "': " + message),
      line_(line), key_(std::move(key))
{
}

namespace {

struct Entry {
    int line;
    std::string key; // section.name
    std::string value;
};

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
            ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t')
            ++j;
        if (j > i)
            out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

const std::set<std::string, std::less<>> kSections{"network", "a1", "a2", "timeline"};

const std::set<std::string, std::less<>> kListKeys{"network.bus", "network.line", "network.load", "timeline.event"};

const std::set<std::string, std::less<>> kAggKeys{"bus",           "units",        "s_rated_kva", "p_stc_kw",
                                                  "ramp_pu_per_s", "filter_tau_s", "mode",        "cpf_pf",
                                                  "cpf_absorbs",   "v1",           "v2",          "v_ref",
                                                  "q_max_kvar",    "p_rated_kw"};

const std::set<std::string, std::less<>> kNetworkKeys{"variant", "slack", "bus", "line", "load", "source_r_ohm",
                                                      "source_x_ohm"};

const std::set<std::string, std::less<>> kTimelineKeys{"dt", "duration", "event"};

double parse_number(std::string_view text, int line, const std::string& key)
{
    double x = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, x);
    if (ec != std::errc() || ptr != end || !std::isfinite(x))
        throw ConfigError(line, key, "malformed number '" + std::string(text) + "'");
    return x;
}

/// Reads a length in metres and returns km, shifting the decimal exponent in
/// text so the result is the correctly rounded km value, not m / 1000.
double parse_metres_as_km(std::string_view text, int line, const std::string& key)
{
    parse_number(text, line, key);
    std::string shifted(text);
    int exponent = -3;
    if (const auto e = shifted.find_first_of("eE"); e != std::string::npos) {
        exponent += static_cast<int>(parse_number(std::string_view(shifted).substr(e + 1), line, key));
        shifted.resize(e);
    }
    shifted += "e" + std::to_string(exponent);
    return parse_number(shifted, line, key);
}

int parse_int(std::string_view text, int line, const std::string& key)
{
    int x = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, x);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(line, key, "malformed integer '" + std::string(text) + "'");
    return x;
}

bool parse_bool(std::string_view text, int line, const std::string& key)
{
    if (text == "true")
        return true;
    if (text == "false")
        return false;
    throw ConfigError(line, key, "expected true or false, got '" + std::string(text) + "'");
}

/// Scalar keys of one section, with their source lines.
class Section {
public:
    void add(const Entry& e, std::string name) { values_.emplace(std::move(name), e); }

    const Entry* get(std::string_view name) const
    {
        auto it = values_.find(name);
        return it == values_.end() ? nullptr : &it->second;
    }

    double number(std::string_view name, double fallback) const
    {
        const Entry* e = get(name);
        return e ? parse_number(e->value, e->line, e->key) : fallback;
    }

    int first_line() const
    {
        int line = 0;
        for (const auto& [_, e] : values_)
            line = line == 0 ? e.line : std::min(line, e.line);
        return line;
    }

    const std::map<std::string, Entry, std::less<>>& values() const { return values_; }

private:
    std::map<std::string, Entry, std::less<>> values_;
};

AggregatorConfig parse_aggregator(const Section& sec, AggregatorConfig cfg, const std::string& prefix)
{
    auto where = [&](std::string_view name) -> std::pair<int, std::string> {
        if (const Entry* e = sec.get(name))
            return {e->line, e->key};
        return {sec.first_line(), prefix + "." + std::string(name)};
    };

    if (const Entry* e = sec.get("bus"))
        cfg.bus = e->value;
    if (const Entry* e = sec.get("units")) {
        cfg.units = parse_int(e->value, e->line, e->key);
        if (cfg.units <= 0)
            throw ConfigError(e->line, e->key, "must be a positive integer");
    }

    InverterParams& u = cfg.unit;
    u.s_rated_kva = sec.number("s_rated_kva", u.s_rated_kva);
    u.p_stc_kw = sec.number("p_stc_kw", u.p_stc_kw);
    u.ramp_pu_per_s = sec.number("ramp_pu_per_s", u.ramp_pu_per_s);
    u.filter_tau_s = sec.number("filter_tau_s", u.filter_tau_s);

    ModeKind kind = kind_of(u.mode);
    if (const Entry* e = sec.get("mode")) {
        try {
            kind = parse_mode_kind(e->value);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(e->line, e->key, ex.what());
        }
    }
    if (kind != kind_of(u.mode))
        u.mode = default_mode(kind, u.s_rated_kva);
    else if (kind != ModeKind::Cpf && sec.get("s_rated_kva"))
        u.mode = default_mode(kind, u.s_rated_kva); // curve defaults scale with the rating

    static const std::map<ModeKind, std::set<std::string, std::less<>>> mode_keys{
        {ModeKind::Cpf, {"cpf_pf", "cpf_absorbs"}},
        {ModeKind::VoltVar, {"v1", "v2", "v_ref", "q_max_kvar"}},
        {ModeKind::VoltWatt, {"v_ref", "v2", "p_rated_kw"}},
    };
    for (const auto& [name, e] : sec.values()) {
        const bool is_mode_key = name == "cpf_pf" || name == "cpf_absorbs" || name == "v1" || name == "v2" ||
                                 name == "v_ref" || name == "q_max_kvar" || name == "p_rated_kw";
        if (is_mode_key && !mode_keys.at(kind).contains(name))
            throw ConfigError(e.line, e.key, "not a parameter of mode '" + std::string(to_string(kind)) + "'");
    }

    if (auto* cpf = std::get_if<ConstantPowerFactor>(&u.mode)) {
        cpf->pf = sec.number("cpf_pf", cpf->pf);
        if (const Entry* e = sec.get("cpf_absorbs"))
            cpf->absorbs = parse_bool(e->value, e->line, e->key);
    } else if (auto* vv = std::get_if<VoltVarMode>(&u.mode)) {
        vv->curve.v1 = sec.number("v1", vv->curve.v1);
        vv->curve.v2 = sec.number("v2", vv->curve.v2);
        vv->curve.v_ref = sec.number("v_ref", vv->curve.v_ref);
        vv->curve.q_max_kvar = sec.number("q_max_kvar", vv->curve.q_max_kvar);
    } else {
        auto& vw = std::get<VoltWattMode>(u.mode);
        vw.curve.v_ref = sec.number("v_ref", vw.curve.v_ref);
        vw.curve.v2 = sec.number("v2", vw.curve.v2);
        vw.curve.p_rated_kw = sec.number("p_rated_kw", vw.curve.p_rated_kw);
    }

    try {
        u.check();
    } catch (const std::invalid_argument& ex) {
        const std::string msg = ex.what();
        std::string_view blame = "mode";
        if (msg.find("filter") != std::string::npos)
            blame = "filter_tau_s";
        else if (msg.find("ramp") != std::string::npos)
            blame = "ramp_pu_per_s";
        else if (msg.find("p_stc") != std::string::npos)
            blame = "p_stc_kw";
        else if (msg.find("s_rated") != std::string::npos)
            blame = "s_rated_kva";
        else
            for (std::string_view k : {"cpf_pf", "v1", "v_ref", "v2", "q_max_kvar", "p_rated_kw"})
                if (sec.get(k)) {
                    blame = k;
                    break;
                }
        const auto [line, key] = where(blame);
        throw ConfigError(line, key, msg);
    }
    return cfg;
}

Event parse_event(const Entry& e)
{
    std::optional<double> t;
    std::optional<Event> ev;
    for (std::string_view tok : split_ws(e.value)) {
        const auto eq = tok.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(e.line, e.key, "expected name=value token, got '" + std::string(tok) + "'");
        const std::string_view name = tok.substr(0, eq);
        const double x = parse_number(tok.substr(eq + 1), e.line, e.key);
        if (name == "t" && !t) {
            t = x;
        } else if ((name == "irradiance" || name == "slack_v") && !ev) {
            ev = Event{};
            if (name == "irradiance")
                ev->action = SetIrradiance{x};
            else
                ev->action = SetSlackVoltage{x};
        } else {
            throw ConfigError(e.line, e.key, "unexpected token '" + std::string(tok) + "'");
        }
    }
    if (!t || !ev)
        throw ConfigError(e.line, e.key, "event needs t=<s> and irradiance=<frac> or slack_v=<pu>");
    ev->time_s = *t;
    return *ev;
}

LineSegment parse_line_row(const Entry& e)
{
    const auto tok = split_ws(e.value);
    if (tok.size() != 4 && tok.size() != 6)
        throw ConfigError(e.line, e.key, "expected '<from> <to> <UG1|UG3|custom> <length_m> [r_ohm_per_km l_mh_per_km]'");
    const double length_km = parse_metres_as_km(tok[3], e.line, e.key);
    if (tok[2] == "UG1" || tok[2] == "UG3") {
        if (tok.size() != 4)
            throw ConfigError(e.line, e.key, "catalogue cables take no impedance columns");
        return make_line(std::string(tok[0]), std::string(tok[1]), tok[2] == "UG1" ? CableType::UG1 : CableType::UG3,
                         length_km);
    }
    if (tok[2] != "custom" || tok.size() != 6)
        throw ConfigError(e.line, e.key, "custom cables need r_ohm_per_km and l_mh_per_km");
    return LineSegment{std::string(tok[0]),
                       std::string(tok[1]),
                       parse_number(tok[4], e.line, e.key),
                       parse_number(tok[5], e.line, e.key),
                       length_km,
                       CableType::Custom};
}

Load parse_load_row(const Entry& e)
{
    const auto tok = split_ws(e.value);
    if (tok.size() != 3)
        throw ConfigError(e.line, e.key, "expected '<bus> <kw> <kvar>'");
    return Load{std::string(tok[0]), parse_number(tok[1], e.line, e.key), parse_number(tok[2], e.line, e.key)};
}

std::optional<NetworkModel> parse_topology(const Section& sec, const std::vector<Entry>& buses,
                                           const std::vector<Entry>& lines, const std::vector<Entry>& loads)
{
    const bool any = !buses.empty() || !lines.empty() || !loads.empty() || sec.get("slack") ||
                     sec.get("source_r_ohm") || sec.get("source_x_ohm");
    if (!any)
        return std::nullopt;

    NetworkModel net = build_cigre_lv_residential();
    if (!lines.empty()) {
        net.lines.clear();
        for (const auto& e : lines)
            net.lines.push_back(parse_line_row(e));
    }
    if (!buses.empty()) {
        net.buses.clear();
        for (const auto& e : buses)
            net.buses.push_back({e.value});
    } else if (!lines.empty()) {
        net.buses.clear();
        for (const auto& l : net.lines)
            for (const std::string* id : {&l.from_bus, &l.to_bus})
                if (!net.find_bus(*id))
                    net.buses.push_back({*id});
    }
    if (!loads.empty()) {
        net.loads.clear();
        for (const auto& e : loads)
            net.loads.push_back(parse_load_row(e));
    }
    if (const Entry* e = sec.get("slack"))
        net.slack.bus = e->value;
    else if (!net.find_bus(net.slack.bus) && !net.buses.empty())
        net.slack.bus = net.buses.front().id;
    net.slack.source_impedance_ohm = {sec.number("source_r_ohm", 0.0), sec.number("source_x_ohm", 0.0)};

    return net;
}

/// Shortest text that parses back to exactly x.
std::string num(double x)
{
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string metres(double km)
{
    // Shortest scientific form of km, then move the decimal point three places.
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, km, std::chars_format::scientific);
    const std::string_view sci(buf, static_cast<std::size_t>(res.ptr - buf));
    const auto e = sci.find('e');
    std::string sign, digits;
    for (char c : sci.substr(0, e)) {
        if (c == '-')
            sign = "-";
        else if (c != '.')
            digits += c;
    }
    int exponent = 0;
    const auto exp_text = sci.substr(e + 1);
    std::from_chars(exp_text.data() + (exp_text.front() == '+'), exp_text.data() + exp_text.size(), exponent);
    const int point = exponent + 3 + 1; // digits before the decimal point
    const int n = static_cast<int>(digits.size());
    if (point <= 0)
        return sign + "0." + std::string(static_cast<std::size_t>(-point), '0') + digits;
    if (point >= n)
        return sign + digits + std::string(static_cast<std::size_t>(point - n), '0');
    return sign + digits.substr(0, static_cast<std::size_t>(point)) + "." + digits.substr(static_cast<std::size_t>(point));
}

} // namespace

ScenarioSpec parse_config(std::string_view text)
{
    std::vector<Entry> entries;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = raw.find('#'); hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        const std::string_view line = trim(raw);
        if (line.empty())
            continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(line_no, std::string(line), "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!kSections.contains(section))
                throw ConfigError(line_no, section, "unknown section");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(line_no, std::string(line), "expected 'key = value'");
        std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.find('.') == std::string::npos) {
            if (section.empty())
                throw ConfigError(line_no, key, "key outside any section");
            key = section + "." + key;
        }
        entries.push_back({line_no, std::move(key), value});
    }

    std::map<std::string, Section, std::less<>> sections;
    std::map<std::string, std::vector<Entry>, std::less<>> lists;
    for (const auto& e : entries) {
        const auto dot = e.key.find('.');
        const std::string sec = e.key.substr(0, dot);
        const std::string name = e.key.substr(dot + 1);
        if (!kSections.contains(sec))
            throw ConfigError(e.line, e.key, "unknown section");
        const auto& known = sec == "network" ? kNetworkKeys : sec == "timeline" ? kTimelineKeys : kAggKeys;
        if (!known.contains(name))
            throw ConfigError(e.line, e.key, "unknown key");
        if (e.value.empty())
            throw ConfigError(e.line, e.key, "missing value");
        if (kListKeys.contains(e.key)) {
            lists[e.key].push_back(e);
            continue;
        }
        if (sections[sec].get(name))
            throw ConfigError(e.line, e.key, "duplicate key");
        sections[sec].add(e, name);
    }

    ScenarioSpec spec;

    const Section& net = sections["network"];
    if (const Entry* e = net.get("variant")) {
        try {
            spec.variant = parse_variant(e->value);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(e->line, e->key, ex.what());
        }
    }
    spec.topology = parse_topology(net, lists["network.bus"], lists["network.line"], lists["network.load"]);

    spec.a1 = parse_aggregator(sections["a1"], spec.a1, "a1");
    spec.a2 = parse_aggregator(sections["a2"], spec.a2, "a2");

    const Section& tl = sections["timeline"];
    if (const Entry* e = tl.get("dt")) {
        spec.timeline.dt_s = parse_number(e->value, e->line, e->key);
        if (!(spec.timeline.dt_s > 0.0))
            throw ConfigError(e->line, e->key, "must be > 0");
    }
    if (const Entry* e = tl.get("duration")) {
        spec.timeline.duration_s = parse_number(e->value, e->line, e->key);
        if (!(spec.timeline.duration_s >= 0.0))
            throw ConfigError(e->line, e->key, "must be >= 0");
    }
    if (const auto& rows = lists["timeline.event"]; !rows.empty()) {
        spec.timeline.events.clear();
        for (const auto& e : rows) {
            if (e.value == "none") {
                if (rows.size() != 1)
                    throw ConfigError(e.line, e.key, "'none' cannot be combined with other events");
                continue;
            }
            const Event ev = parse_event(e);
            if (!spec.timeline.events.empty() && ev.time_s < spec.timeline.events.back().time_s)
                throw ConfigError(e.line, e.key, "events must be listed in time order");
            spec.timeline.events.push_back(ev);
        }
    }
    try {
        spec.timeline.check();
    } catch (const std::invalid_argument& ex) {
        const std::string msg = ex.what();
        const auto& rows = lists["timeline.event"];
        if (msg.find("event") != std::string::npos) {
            const Entry* blame = rows.empty() ? nullptr : &rows.front();
            for (const auto& e : rows) {
                if (e.value == "none")
                    continue;
                try {
                    ScenarioTimeline one{{parse_event(e)}, spec.timeline.duration_s, spec.timeline.dt_s};
                    one.check();
                } catch (const std::invalid_argument&) {
                    blame = &e;
                    break;
                }
            }
            throw ConfigError(blame ? blame->line : 0, blame ? blame->key : "timeline.event", msg);
        }
        const Entry* e = tl.get("dt") ? tl.get("dt") : tl.get("duration");
        throw ConfigError(e ? e->line : 0, e ? e->key : "timeline.dt", msg);
    }

    return spec;
}

ScenarioSpec load_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(0, path.string(), "cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string to_config_text(const ScenarioSpec& spec)
{
    std::ostringstream out;
    out << "[network]\n";
    out << "variant = " << to_string(spec.variant) << "\n";
    if (spec.topology) {
        const NetworkModel& net = *spec.topology;
        out << "slack = " << net.slack.bus << "\n";
        if (net.slack.source_impedance_ohm != std::complex<double>{})
            out << "source_r_ohm = " << num(net.slack.source_impedance_ohm.real()) << "\n"
                << "source_x_ohm = " << num(net.slack.source_impedance_ohm.imag()) << "\n";
        for (const auto& b : net.buses)
            out << "bus = " << b.id << "\n";
        for (const auto& l : net.lines) {
            out << "line = " << l.from_bus << " " << l.to_bus << " " << to_string(l.cable) << " "
                << metres(l.length_km);
            if (l.cable == CableType::Custom)
                out << " " << num(l.resistance_per_km) << " " << num(l.inductance_per_km);
            out << "\n";
        }
        for (const auto& ld : net.loads)
            out << "load = " << ld.bus << " " << num(ld.active_power_kw) << " " << num(ld.reactive_power_kvar)
                << "\n";
    }

    for (const auto& [name, agg] : {std::pair{"a1", &spec.a1}, std::pair{"a2", &spec.a2}}) {
        const InverterParams& u = agg->unit;
        out << "\n[" << name << "]\n";
        out << "bus = " << agg->bus << "\n";
        out << "units = " << agg->units << "\n";
        out << "s_rated_kva = " << num(u.s_rated_kva) << "\n";
        out << "p_stc_kw = " << num(u.p_stc_kw) << "\n";
        out << "ramp_pu_per_s = " << num(u.ramp_pu_per_s) << "\n";
        out << "filter_tau_s = " << num(u.filter_tau_s) << "\n";
        out << "mode = " << to_string(kind_of(u.mode)) << "\n";
        if (const auto* cpf = std::get_if<ConstantPowerFactor>(&u.mode)) {
            out << "cpf_pf = " << num(cpf->pf) << "\n";
            out << "cpf_absorbs = " << (cpf->absorbs ? "true" : "false") << "\n";
        } else if (const auto* vv = std::get_if<VoltVarMode>(&u.mode)) {
            out << "v1 = " << num(vv->curve.v1) << "\n";
            out << "v_ref = " << num(vv->curve.v_ref) << "\n";
            out << "v2 = " << num(vv->curve.v2) << "\n";
            out << "q_max_kvar = " << num(vv->curve.q_max_kvar) << "\n";
        } else {
            const auto& vw = std::get<VoltWattMode>(u.mode);
            out << "v_ref = " << num(vw.curve.v_ref) << "\n";
            out << "v2 = " << num(vw.curve.v2) << "\n";
            out << "p_rated_kw = " << num(vw.curve.p_rated_kw) << "\n";
        }
    }

    out << "\n[timeline]\n";
    out << "duration = " << num(spec.timeline.duration_s) << "\n";
    out << "dt = " << num(spec.timeline.dt_s) << "\n";
    if (spec.timeline.events.empty())
        out << "event = none\n";
    for (const auto& e : spec.timeline.events) {
        out << "event = t=" << num(e.time_s) << " ";
        if (const auto* irr = std::get_if<SetIrradiance>(&e.action))
            out << "irradiance=" << num(irr->frac) << "\n";
        else
            out << "slack_v=" << num(std::get<SetSlackVoltage>(e.action).pu) << "\n";
    }
    return out.str();
}

} // namespace invergrid
