#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <json.hpp>

namespace groundkit::jsonl {

// Calls fn(line_number, parsed) for every non-empty line. Throws Parse
// with the file name and 1-based line number on malformed JSON, Io when
// the file cannot be opened.
void for_each(const std::filesystem::path& file,
              const std::function<void(std::size_t, const nlohmann::json&)>& fn);

// One compact JSON document per line.
class Writer {
public:
    explicit Writer(const std::filesystem::path& file);
    ~Writer();
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    void write(const nlohmann::json& doc);
    std::size_t lines_written() const { return count_; }

private:
    struct Impl;
    Impl* impl_;
    std::size_t count_ = 0;
};

} // namespace groundkit::jsonl
