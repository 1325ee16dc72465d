// Output files: CSV with a typed header row and JSON documents. Floats are
// written with 17 significant digits and lines end in LF.
#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace vines::scenarios {

/// Raised when an output file cannot be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Cell = std::variant<double, std::int64_t, std::string>;

struct Column {
    std::string name;
    std::string type; ///< f64, i64 or str
};

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<Column> columns);

    void row(const std::vector<Cell>& cells);
    [[nodiscard]] std::size_t rows() const { return rows_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t width_;
    std::size_t rows_ = 0;
};

/// Text form of a float used in every CSV.
std::string format_number(double v);

/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace vines::scenarios
