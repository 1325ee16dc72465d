#include "vines/scenarios/report.hpp"

#include <cmath>
#include <fmt/format.h>

namespace vines::scenarios {

namespace {

std::ofstream open(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(fmt::format("cannot write {}", path.string()));
    }
    return out;
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string q = "\"";
    for (const char c : s) {
        q += c;
        if (c == '"') {
            q += '"';
        }
    }
    return q + '"';
}

} // namespace

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return fmt::format("{:.17g}", v);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<Column> columns)
    : path_(path), out_(open(path)), width_(columns.size()) {
    std::string header;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        header += fmt::format("{}{}:{}", i ? "," : "", columns[i].name, columns[i].type);
    }
    out_ << header << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
    if (cells.size() != width_) {
        throw std::logic_error(fmt::format("{}: row has {} cells, header has {}", path_.string(), cells.size(), width_));
    }
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) {
            line += ',';
        }
        std::visit(
            [&line](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, double>) {
                    line += format_number(v);
                } else if constexpr (std::is_same_v<T, std::int64_t>) {
                    line += fmt::format("{}", v);
                } else {
                    line += quote(v);
                }
            },
            cells[i]);
    }
    out_ << line << '\n';
    ++rows_;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open(path);
    out << text;
    if (!out) {
        throw IoError(fmt::format("cannot write {}", path.string()));
    }
}

} // namespace vines::scenarios
