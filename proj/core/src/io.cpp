#include "r2d2surv/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "r2d2surv/errors.hpp"

namespace r2d2surv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

}  // namespace

Eigen::Index CsvTable::find(std::string_view name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == name) return static_cast<Eigen::Index>(j);
    return -1;
}

std::ptrdiff_t TextTable::find(std::string_view name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == name) return static_cast<std::ptrdiff_t>(j);
    return -1;
}

TextTable parse_text_csv(std::string_view text) {
    TextTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        if (!have_header) {
            for (auto f : fields) table.header.push_back(unquote(f));
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw ParseError(line_no, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                          std::to_string(fields.size()));
        std::vector<std::string> row;
        for (auto f : fields) row.push_back(unquote(f));
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw ParseError(0, "empty CSV input");
    return table;
}

TextTable read_text_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text_csv(ss.str());
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        if (!have_header) {
            for (auto f : fields) table.header.push_back(unquote(f));
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw ParseError(line_no, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                          std::to_string(fields.size()));
        std::vector<double> row(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j) {
            auto f = fields[j];
            if (!f.empty() && f.front() == '+') f.remove_prefix(1);
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[j]);
            if (f.empty() || ec != std::errc() || ptr != f.data() + f.size())
                throw ParseError(line_no, "column '" + table.header[j] + "': cannot parse '" + std::string(f) +
                                              "' as a number");
        }
        rows.push_back(std::move(row));
    }
    if (!have_header) throw ParseError(0, "empty CSV input");
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

SurvivalDataset survival_from_table(const CsvTable& table, bool standardize) {
    const auto time_col = table.find("time");
    const auto status_col = table.find("status");
    if (time_col < 0) throw ParseError(1, "missing required column 'time'");
    if (status_col < 0) throw ParseError(1, "missing required column 'status'");

    const Eigen::Index n = table.values.rows();
    Eigen::VectorXd times = table.values.col(time_col);
    Eigen::VectorXi events(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = table.values(i, status_col);
        // data rows start on line 2
        if (s != 0.0 && s != 1.0) throw ParseError(static_cast<std::size_t>(i) + 2, "status must be 0 or 1");
        if (!(times[i] > 0.0)) throw ParseError(static_cast<std::size_t>(i) + 2, "time must be positive");
        events[i] = static_cast<int>(s);
    }
    std::vector<std::string> names;
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(table.header.size()); ++j) {
        if (j == time_col || j == status_col) continue;
        names.push_back(table.header[static_cast<std::size_t>(j)]);
        cols.push_back(j);
    }
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) x.col(static_cast<Eigen::Index>(k)) = table.values.col(cols[k]);
    return standardize ? SurvivalDataset::from_raw(std::move(times), std::move(events), std::move(x), std::move(names))
                       : SurvivalDataset::unscaled(std::move(times), std::move(events), std::move(x), std::move(names));
}

SurvivalDataset read_survival_csv(const std::filesystem::path& path, bool standardize) {
    return survival_from_table(read_csv(path), standardize);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace r2d2surv
