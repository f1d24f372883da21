#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmp::csv {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Locale-independent number formatting ('.' decimal point always).
std::string format(double value);
std::string format(long value);

// Line-buffered CSV writer; each row is flushed so a crash leaves a valid
// prefix. LF line endings.
class Writer {
  public:
    Writer(const std::string& path, const std::vector<std::string>& header);

    void write_row(const std::vector<std::string>& cells);
    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::ofstream file_;
    size_t columns_;
};

inline std::string na_or(const std::optional<double>& value) {
    return value ? format(*value) : "NA";
}

}  // namespace cmp::csv
