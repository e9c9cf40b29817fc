#include <corrkit/evalkit.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace corrkit {

namespace {

std::string fmt_value(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Splits on whitespace, ignoring '#' comments. Returns false on a blank line.
bool tokenize(std::string_view line, std::vector<std::string_view>& out)
{
    out.clear();
    if (const auto h = line.find('#'); h != std::string_view::npos) {
        line = line.substr(0, h);
    }
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t j = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > j) out.push_back(line.substr(j, i - j));
    }
    return !out.empty();
}

double parse_double(std::string_view tok, std::size_t line)
{
    // from_chars for double is available in libstdc++ 11
    double x = 0.0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
        throw ParseError("expected a number, got '" + std::string(tok) + "'", line);
    }
    return x;
}

Unit parse_unit(std::string_view s, std::size_t line)
{
    for (Unit u : {Unit::Pixel, Unit::Percent, Unit::SceneUnits, Unit::Dimensionless}) {
        if (s == unit_name(u)) return u;
    }
    throw ParseError("unknown unit '" + std::string(s) + "'", line);
}

template <typename Fn>
void for_each_line(std::string_view text, Fn fn)
{
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view line = text.substr(0, nl);
        fn(line, ++line_no);
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
}

} // namespace

std::string format_metric_table(std::span<const MetricReport> reports)
{
    std::size_t wn = 6, wv = 5, wu = 4;
    std::vector<std::string> values;
    for (const auto& r : reports) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.6f", r.value);
        values.emplace_back(buf);
        wn = std::max(wn, r.name.size());
        wv = std::max(wv, values.back().size());
        wu = std::max(wu, std::string_view(unit_name(r.unit)).size());
    }
    std::ostringstream os;
    auto row = [&](std::string_view a, std::string_view b, std::string_view c, std::string_view d) {
        os << a << std::string(wn - a.size() + 2, ' ') << std::string(wv - b.size(), ' ') << b << "  " << c
           << std::string(wu - c.size() + 2, ' ') << d << '\n';
    };
    row("metric", "value", "unit", "count");
    for (std::size_t i = 0; i < reports.size(); ++i) {
        row(reports[i].name, values[i], unit_name(reports[i].unit), std::to_string(reports[i].count));
    }
    return os.str();
}

std::string format_metric_key_values(std::span<const MetricReport> reports)
{
    std::string out;
    for (const auto& r : reports) {
        out += r.name + "=" + fmt_value(r.value) + "\n";
        out += r.name + ".unit=" + unit_name(r.unit) + "\n";
        out += r.name + ".count=" + std::to_string(r.count) + "\n";
    }
    return out;
}

std::vector<MetricReport> parse_metric_key_values(std::string_view text)
{
    std::vector<MetricReport> out;
    std::map<std::string, std::size_t> by_name;
    for_each_line(text, [&](std::string_view raw, std::size_t line) {
        const auto s = trim(raw);
        if (s.empty() || s.front() == '#') return;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw ParseError("expected key=value", line);
        }
        const std::string key(trim(s.substr(0, eq)));
        const auto val = trim(s.substr(eq + 1));
        auto field = [&](std::string_view suffix) -> MetricReport* {
            if (key.size() <= suffix.size() || key.compare(key.size() - suffix.size(), suffix.size(), suffix) != 0) {
                return nullptr;
            }
            const auto it = by_name.find(key.substr(0, key.size() - suffix.size()));
            if (it == by_name.end()) {
                throw ParseError("attribute before its metric: " + key, line);
            }
            return &out[it->second];
        };
        if (auto* r = field(".unit")) {
            r->unit = parse_unit(val, line);
        } else if (auto* r2 = field(".count")) {
            const double c = parse_double(val, line);
            if (!(c >= 0.0) || c != std::floor(c)) throw ParseError("count must be a non-negative integer", line);
            r2->count = static_cast<std::size_t>(c);
        } else {
            if (by_name.count(key)) throw ParseError("duplicate metric " + key, line);
            by_name[key] = out.size();
            out.push_back({key, parse_double(val, line), Unit::Dimensionless, 0});
        }
    });
    return out;
}

std::string format_matches(const MatchSet& matches)
{
    std::string out = "# u1 v1 u2 v2 confidence\n";
    for (const auto& m : matches.matches()) {
        out += fmt_value(m.u1) + " " + fmt_value(m.v1) + " " + fmt_value(m.u2) + " " + fmt_value(m.v2) + " "
               + fmt_value(m.confidence) + "\n";
    }
    return out;
}

MatchSet parse_matches(std::string_view text)
{
    std::vector<Match> ms;
    std::vector<std::string_view> tok;
    for_each_line(text, [&](std::string_view line, std::size_t no) {
        if (!tokenize(line, tok)) return;
        if (tok.size() != 4 && tok.size() != 5) {
            throw ParseError("expected 'u1 v1 u2 v2 [confidence]'", no);
        }
        Match m{parse_double(tok[0], no), parse_double(tok[1], no), parse_double(tok[2], no),
                parse_double(tok[3], no), tok.size() == 5 ? parse_double(tok[4], no) : 1.0};
        ms.push_back(m);
    });
    try {
        return MatchSet(std::move(ms));
    } catch (const ValidationError& e) {
        throw ParseError(e.what(), 0);
    }
}

std::string format_fundamental(const FundamentalMatrix& F)
{
    std::string out;
    for (int r = 0; r < 3; ++r) {
        out += fmt_value(F.matrix()(r, 0)) + " " + fmt_value(F.matrix()(r, 1)) + " " + fmt_value(F.matrix()(r, 2)) + "\n";
    }
    return out;
}

FundamentalMatrix parse_fundamental(std::string_view text)
{
    std::vector<double> vals;
    std::vector<std::string_view> tok;
    std::size_t last = 0;
    for_each_line(text, [&](std::string_view line, std::size_t no) {
        if (!tokenize(line, tok)) return;
        for (auto t : tok) vals.push_back(parse_double(t, no));
        last = no;
    });
    if (vals.size() != 9) {
        throw ParseError("fundamental matrix needs 9 numbers, got " + std::to_string(vals.size()), last);
    }
    Eigen::Matrix3d F;
    F << vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6], vals[7], vals[8];
    return FundamentalMatrix::from_matrix(F);
}

} // namespace corrkit
