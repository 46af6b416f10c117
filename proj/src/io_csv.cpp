#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <system_error>

#include "dtwin/error.hpp"
#include "dtwin/io.hpp"

namespace dtwin::io {

// -- numbers ------------------------------------------------------------------

std::string format_full(double value) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw Error(ErrorCode::Io, "cannot format number");
    return {buf, end};
}

namespace {

// Adds one unit in the last place of a decimal digit string.
void increment_digits(std::string& digits) {
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (*it != '9') {
            ++*it;
            return;
        }
        *it = '0';
    }
    digits.insert(digits.begin(), '1');
}

}  // namespace

std::string format_fixed(double value, int decimals) {
    if (!std::isfinite(value)) return format_full(value);
    decimals = std::max(decimals, 0);

    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific);
    if (ec != std::errc{}) throw Error(ErrorCode::Io, "cannot format number");
    const std::string_view sci(buf, static_cast<std::size_t>(end - buf));

    const bool negative = sci.front() == '-';
    const auto e_pos = sci.find('e');
    std::string digits;
    for (const char c : sci.substr(negative ? 1 : 0, e_pos - (negative ? 1 : 0))) {
        if (c != '.') digits.push_back(c);
    }
    int exponent = 0;
    std::from_chars(sci.data() + e_pos + 1 + (sci[e_pos + 1] == '+' ? 1 : 0), sci.data() + sci.size(), exponent);

    // value = 0.<digits> * 10^(exponent + 1); keep the digits that land at or
    // above 10^-decimals.
    const long keep = static_cast<long>(exponent) + 1 + decimals;
    std::string units;
    if (keep >= static_cast<long>(digits.size())) {
        units = digits + std::string(static_cast<std::size_t>(keep) - digits.size(), '0');
    } else if (keep >= 0) {
        units = digits.substr(0, static_cast<std::size_t>(keep));
        const bool round_up = digits[static_cast<std::size_t>(keep)] >= '5';
        if (units.empty()) units = "0";
        if (round_up) increment_digits(units);
    } else {
        units = "0";
    }
    units.erase(0, std::min(units.find_first_not_of('0'), units.size()));
    const bool zero = units.empty();
    if (units.size() < static_cast<std::size_t>(decimals) + 1) {
        units.insert(0, static_cast<std::size_t>(decimals) + 1 - units.size(), '0');
    }
    std::string out = (negative && !zero) ? "-" : "";
    out += units.substr(0, units.size() - static_cast<std::size_t>(decimals));
    if (decimals > 0) {
        out += '.';
        out += units.substr(units.size() - static_cast<std::size_t>(decimals));
    }
    return out;
}

// -- CSV reading ----------------------------------------------------------------

namespace {

struct Field {
    std::string text;
    std::size_t column = 1;  // 1-based character column of the field start
};

struct Record {
    std::size_t line = 0;
    std::vector<Field> fields;
};

std::vector<Record> split_records(std::string_view text) {
    std::vector<Record> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        ++line_no;
        const std::size_t eol = text.find('\n', pos);
        const std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;

        if (!line.empty() && line.back() == '\r') {
            throw Error(ErrorCode::MalformedRow, "CR line ending; LF expected", {line_no, line.size()});
        }
        if (line.empty()) {
            if (pos >= text.size()) break;
            throw Error(ErrorCode::MalformedRow, "blank line", {line_no, 1});
        }

        Record record{line_no, {}};
        std::size_t i = 0;
        while (true) {
            Field field;
            field.column = i + 1;
            if (i < line.size() && line[i] == '"') {
                ++i;
                bool closed = false;
                while (i < line.size()) {
                    if (line[i] == '"') {
                        if (i + 1 < line.size() && line[i + 1] == '"') {
                            field.text.push_back('"');
                            i += 2;
                            continue;
                        }
                        closed = true;
                        ++i;
                        break;
                    }
                    field.text.push_back(line[i++]);
                }
                if (!closed) throw Error(ErrorCode::MalformedRow, "unterminated quoted field", {line_no, field.column});
                if (i < line.size() && line[i] != ',') {
                    throw Error(ErrorCode::MalformedRow, "text after closing quote", {line_no, i + 1});
                }
            } else {
                const std::size_t comma = line.find(',', i);
                const std::size_t stop = comma == std::string_view::npos ? line.size() : comma;
                field.text.assign(line.substr(i, stop - i));
                i = stop;
            }
            record.fields.push_back(std::move(field));
            if (i >= line.size()) break;
            ++i;  // skip ','
            if (i == line.size()) {
                record.fields.push_back({"", i + 1});
                break;
            }
        }
        records.push_back(std::move(record));
    }
    return records;
}

double parse_real(const Field& field, std::size_t line, std::string_view what) {
    double value = 0.0;
    const char* first = field.text.data();
    const char* last = first + field.text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    // from_chars also accepts "nan" and "inf"; only finite decimal numbers are valid here.
    if (field.text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw Error(ErrorCode::MalformedNumber, "'" + field.text + "' is not a finite number (" + std::string(what) + ")",
                    {line, field.column});
    }
    return value;
}

std::int64_t parse_time(const Field& field, std::size_t line) {
    std::int64_t value = 0;
    const char* first = field.text.data();
    const char* last = first + field.text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.text.empty() || ec != std::errc{} || ptr != last) {
        throw Error(ErrorCode::MalformedNumber, "'" + field.text + "' is not an integer time index", {line, field.column});
    }
    return value;
}

void require_width(const Record& record, std::size_t width) {
    if (record.fields.size() != width) {
        throw Error(ErrorCode::MalformedRow,
                    "row has " + std::to_string(record.fields.size()) + " fields, header has " + std::to_string(width),
                    {record.line, 1});
    }
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

// -- events -------------------------------------------------------------------

EventMatrix parse_event_csv(std::string_view text) {
    const auto records = split_records(text);
    if (records.empty()) throw Error(ErrorCode::MalformedHeader, "missing header", {1, 1});
    const auto& header = records.front();
    if (header.fields.front().text != "t") {
        throw Error(ErrorCode::MalformedHeader, "first column must be 't', got '" + header.fields.front().text + "'",
                    {header.line, 1});
    }
    if (header.fields.size() < 2) throw Error(ErrorCode::MalformedHeader, "no event channels", {header.line, 1});

    RawEventGrid raw;
    for (std::size_t c = 1; c < header.fields.size(); ++c) {
        const auto& name = header.fields[c].text;
        const auto slash = name.find('/');
        ChannelLabel label = slash == std::string::npos
                                 ? ChannelLabel{name, std::string(kDefaultProcess)}
                                 : ChannelLabel{name.substr(slash + 1), name.substr(0, slash)};
        if (label.name.empty() || label.process.empty()) {
            throw Error(ErrorCode::MalformedHeader, "empty channel or process name in '" + name + "'",
                        {header.line, header.fields[c].column});
        }
        for (const auto& seen : raw.labels) {
            if (seen.name == label.name) {
                throw Error(ErrorCode::MalformedHeader, "duplicate channel name '" + label.name + "'",
                            {header.line, header.fields[c].column});
            }
        }
        raw.labels.push_back(std::move(label));
    }
    const std::size_t width = header.fields.size();
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        require_width(rec, width);
        const std::int64_t t = parse_time(rec.fields[0], rec.line);
        if (t != static_cast<std::int64_t>(r)) {
            throw Error(ErrorCode::TimeAxisGap, "expected t = " + std::to_string(r) + ", got " + std::to_string(t),
                        {rec.line, 1});
        }
        raw.time.push_back(t);
        for (std::size_t c = 1; c < width; ++c) {
            raw.values.push_back(parse_real(rec.fields[c], rec.line, header.fields[c].text));
        }
    }
    if (raw.time.empty()) throw Error(ErrorCode::EmptyModel, "no data rows after the header", {header.line + 1, 1});
    return validate_event_matrix(std::move(raw));
}

std::string write_event_csv(const EventMatrix& events) {
    std::string out = "t";
    for (const auto& label : events.labels()) out += "," + quote_if_needed(label.process + "/" + label.name);
    out += '\n';
    for (std::size_t r = 0; r < events.periods(); ++r) {
        out += std::to_string(events.time_at(r));
        for (const double v : events.row(r)) out += "," + format_full(v);
        out += '\n';
    }
    return out;
}

// -- indicator series ---------------------------------------------------------

double TableOneSeries::resolved_total() const {
    if (rows.empty()) return declared_total.value_or(0.0);
    double total = 0.0;
    for (const auto& row : rows) total += row.value;
    return total;
}

bool TableOneSeries::declared_total_consistent(double tolerance) const {
    if (!declared_total || rows.empty()) return true;
    return std::abs(resolved_total() - *declared_total) <= tolerance;
}

TableOneSeries parse_indicator_csv(std::string_view text) {
    const auto records = split_records(text);
    if (records.empty()) throw Error(ErrorCode::MalformedHeader, "missing header", {1, 1});
    const auto& header = records.front();
    if (header.fields.size() < 2 || header.fields[0].text != "t" || header.fields[1].text != "V") {
        throw Error(ErrorCode::MalformedHeader, "header must start with 't,V'", {header.line, 1});
    }
    TableOneSeries series;
    for (std::size_t c = 2; c < header.fields.size(); ++c) series.channel_names.push_back(header.fields[c].text);
    const std::size_t width = header.fields.size();

    auto non_negative = [](double v, const Field& f, std::size_t line) {
        if (!std::isfinite(v) || v < 0.0) {
            throw Error(ErrorCode::MalformedNumber, "indicator value '" + f.text + "' must be finite and >= 0",
                        {line, f.column});
        }
    };

    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.front().text == "Total") {
            if (r + 1 != records.size()) {
                throw Error(ErrorCode::MalformedRow, "Total row must be the last row", {rec.line, 1});
            }
            if (rec.fields.size() < 2) throw Error(ErrorCode::MalformedRow, "Total row has no value", {rec.line, 1});
            for (std::size_t c = 2; c < rec.fields.size(); ++c) {
                if (!rec.fields[c].text.empty()) {
                    throw Error(ErrorCode::MalformedRow, "Total row carries extra values", {rec.line, rec.fields[c].column});
                }
            }
            const double total = parse_real(rec.fields[1], rec.line, "Total");
            if (!std::isfinite(total)) {
                throw Error(ErrorCode::MalformedNumber, "declared total is not finite", {rec.line, rec.fields[1].column});
            }
            series.declared_total = total;
            break;
        }
        require_width(rec, width);
        const std::int64_t t = parse_time(rec.fields[0], rec.line);
        if (!series.rows.empty() && t <= series.rows.back().t) {
            throw Error(ErrorCode::NonMonotonicTime,
                        "t = " + std::to_string(t) + " follows t = " + std::to_string(series.rows.back().t), {rec.line, 1});
        }
        const double v = parse_real(rec.fields[1], rec.line, "V");
        non_negative(v, rec.fields[1], rec.line);
        series.rows.push_back({t, v});
        if (width > 2) {
            auto& values = series.channel_values.emplace_back();
            for (std::size_t c = 2; c < width; ++c) {
                const double cv = parse_real(rec.fields[c], rec.line, header.fields[c].text);
                non_negative(cv, rec.fields[c], rec.line);
                values.push_back(cv);
            }
        }
    }
    return series;
}

TableOneSeries to_table(const IndicatorSeries& series) {
    TableOneSeries table;
    const bool single_v = series.channel_names.size() == 1 && series.channel_names.front() == "V";
    if (!single_v) table.channel_names = series.channel_names;
    for (const auto& point : series.points) {
        table.rows.push_back({point.t, point.sum});
        if (!single_v) table.channel_values.push_back(point.channels);
    }
    table.declared_total = series.grand_total;
    return table;
}

IndicatorSeries to_indicator_series(const TableOneSeries& table) {
    IndicatorSeries series;
    const bool per_channel = !table.channel_names.empty();
    series.channel_names = per_channel ? table.channel_names : std::vector<std::string>{"V"};
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        series.append(table.rows[r].t,
                      per_channel ? table.channel_values[r] : std::vector<double>{table.rows[r].value});
    }
    if (table.rows.empty() && table.declared_total) series.grand_total = *table.declared_total;
    return series;
}

namespace {

template <typename Format>
std::string write_table(const TableOneSeries& table, Format&& format, bool with_total) {
    std::string out = "t,V";
    for (const auto& name : table.channel_names) out += "," + quote_if_needed(name);
    out += '\n';
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out += std::to_string(table.rows[r].t) + "," + format(table.rows[r].value);
        if (!table.channel_values.empty()) {
            for (const double v : table.channel_values[r]) out += "," + format(v);
        }
        out += '\n';
    }
    if (with_total && table.declared_total) out += "Total," + format(*table.declared_total) + "\n";
    return out;
}

}  // namespace

std::string write_indicator_csv(const TableOneSeries& series) {
    return write_table(series, format_full, true);
}

std::string write_indicator_csv(const IndicatorSeries& series) { return write_indicator_csv(to_table(series)); }

std::string emit_plot_data(const TableOneSeries& series, int precision) {
    return write_table(series, [precision](double v) { return format_fixed(v, precision); }, false);
}

std::string emit_plot_data(const IndicatorSeries& series, int precision) {
    return emit_plot_data(to_table(series), precision);
}

}  // namespace dtwin::io
