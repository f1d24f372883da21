#include "cmp/csv.hpp"

#include <charconv>
#include <stdexcept>

namespace cmp::csv {

std::string format(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw std::runtime_error("failed to format a double");
    }
    return std::string(buf, ptr);
}

std::string format(long value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw std::runtime_error("failed to format an integer");
    }
    return std::string(buf, ptr);
}

Writer::Writer(const std::string& path, const std::vector<std::string>& header)
    : path_(path), file_(path, std::ios::binary), columns_(header.size()) {
    if (!file_) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    write_row(header);
}

void Writer::write_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) {
        throw std::logic_error("CSV row has " + std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(columns_));
    }
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) file_ << ',';
        file_ << cells[i];
    }
    file_ << '\n';
    file_.flush();
    if (!file_) {
        throw IoError("write to '" + path_ + "' failed");
    }
}

}  // namespace cmp::csv
