#include "cover/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cover/errors.hpp"

namespace cover {

namespace {

std::vector<std::pair<std::string, std::size_t>> split_csv(const std::string& line) {
    std::vector<std::pair<std::string, std::size_t>> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const auto first = field.find_first_not_of(" \t\r\"");
        const auto last = field.find_last_not_of(" \t\r\"");
        field = first == std::string::npos ? std::string{} : field.substr(first, last - first + 1);
        fields.emplace_back(std::move(field), start + 1);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

bool parse_number(const std::string& text, double& value) {
    if (text.empty()) return false;
    const char* begin = text.data();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), value);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

// Days since 1970-01-01 for a proleptic Gregorian date.
long days_from_civil(long y, long m, long d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const long yoe = y - era * 400;
    const long doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const long doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

bool parse_iso_date(const std::string& text, long& days) {
    int y = 0, m = 0, d = 0;
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return false;
    const auto a = std::from_chars(text.data(), text.data() + 4, y);
    const auto b = std::from_chars(text.data() + 5, text.data() + 7, m);
    const auto c = std::from_chars(text.data() + 8, text.data() + 10, d);
    if (a.ec != std::errc{} || b.ec != std::errc{} || c.ec != std::errc{}) return false;
    if (a.ptr != text.data() + 4 || b.ptr != text.data() + 7 || c.ptr != text.data() + 10) return false;
    if (m < 1 || m > 12 || d < 1 || d > 31) return false;
    days = days_from_civil(y, m, d);
    return true;
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), ptr);
}

PriceTable read_price_table(std::istream& in) {
    PriceTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") != std::string::npos) break;
    }
    if (line_no == 0 || line.find_first_not_of(" \t\r") == std::string::npos)
        throw ParseError("price table is empty", line_no == 0 ? 1 : line_no, 1);
    const auto header = split_csv(line);
    if (header.size() < 2) throw ParseError("header needs a time column and at least one price column", line_no, 1);
    for (std::size_t i = 1; i < header.size(); ++i) table.assets.push_back(header[i].first);
    const std::size_t n = table.assets.size();

    enum class TimeKind { unknown, date, number } kind = TimeKind::unknown;
    long first_day = 0;
    double first_time = 0.0;
    std::vector<double> flat;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_csv(line);
        if (fields.size() != n + 1)
            throw ParseError("expected " + std::to_string(n + 1) + " fields, found " + std::to_string(fields.size()), line_no,
                             fields.back().second);
        const auto& [stamp, stamp_col] = fields[0];
        long day = 0;
        double number = 0.0;
        double years = 0.0;
        const bool is_date = parse_iso_date(stamp, day);
        const bool is_number = !is_date && parse_number(stamp, number);
        if (!is_date && !is_number) throw ParseError("time column must be an ISO date or a number: '" + stamp + "'", line_no, stamp_col);
        if (kind == TimeKind::unknown) {
            kind = is_date ? TimeKind::date : TimeKind::number;
            first_day = day;
            first_time = number;
        } else if ((kind == TimeKind::date) != is_date) {
            throw ParseError("time column mixes dates and numbers", line_no, stamp_col);
        }
        years = is_date ? static_cast<double>(day - first_day) / 365.25 : number - first_time;
        if (!table.years.empty() && !(years > table.years.back()))
            throw ParseError("rows must be in strictly increasing time order", line_no, stamp_col);
        table.labels.push_back(stamp);
        table.years.push_back(years);
        for (std::size_t i = 1; i <= n; ++i) {
            double v = 0.0;
            if (!parse_number(fields[i].first, v)) throw ParseError("not a number: '" + fields[i].first + "'", line_no, fields[i].second);
            if (!(v > 0.0)) throw ParseError("prices must be positive", line_no, fields[i].second);
            flat.push_back(v);
        }
    }
    const auto rows = static_cast<Eigen::Index>(table.years.size());
    table.prices.resize(rows, static_cast<Eigen::Index>(n));
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(n); ++c)
            table.prices(r, c) = flat[static_cast<std::size_t>(r) * n + static_cast<std::size_t>(c)];
    return table;
}

PriceTable read_price_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open price file '" + path + "'");
    return read_price_table(in);
}

void write_ledger_csv(std::ostream& out, const HedgeLedger& ledger) {
    std::ostringstream s;
    const Eigen::Index n = ledger.fractions.cols();
    s << "time,wealth,cash";
    for (Eigen::Index i = 1; i <= n; ++i) s << ",fraction_" << i << ",shares_" << i;
    s << '\n';
    for (std::size_t k = 0; k < ledger.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        s << format_double(ledger.times[k]) << ',' << format_double(ledger.wealth[k]) << ',' << format_double(ledger.cash[k]);
        for (Eigen::Index i = 0; i < n; ++i)
            s << ',' << format_double(ledger.fractions(row, i)) << ',' << format_double(ledger.shares(row, i));
        s << '\n';
    }
    out << s.str();
}

void write_demon_csv(std::ostream& out, const std::vector<DemonRow>& rows) {
    std::ostringstream s;
    s << "step,upticks,stock,wealth\n";
    for (const auto& r : rows)
        s << r.step << ',' << r.upticks << ',' << format_double(r.stock) << ',' << format_double(r.wealth) << '\n';
    out << s.str();
}

void write_backtest_csv(std::ostream& out, const BacktestResult& result) {
    std::ostringstream s;
    s << "time,wealth\n";
    for (std::size_t k = 0; k < result.wealth.size(); ++k)
        s << format_double(result.years[k]) << ',' << format_double(result.wealth[k]) << '\n';
    out << s.str();
}

}  // namespace cover
