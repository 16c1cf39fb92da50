#include "groundkit/jsonl.hpp"

#include <fstream>

#include "groundkit/error.hpp"

namespace groundkit::jsonl {

void for_each(const std::filesystem::path& file,
              const std::function<void(std::size_t, const nlohmann::json&)>& fn) {
    std::ifstream in(file);
    require(in.good(), ErrorCode::Io, "cannot open " + file.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            fail(ErrorCode::Parse,
                 file.string() + ":" + std::to_string(lineno) + ": malformed JSON line");
        }
        fn(lineno, doc);
    }
}

struct Writer::Impl {
    std::ofstream out;
    std::filesystem::path path;
};

Writer::Writer(const std::filesystem::path& file) : impl_(new Impl) {
    impl_->path = file;
    impl_->out.open(file, std::ios::binary | std::ios::trunc);
    if (!impl_->out.good()) {
        delete impl_;
        fail(ErrorCode::Io, "cannot write " + file.string());
    }
}

Writer::~Writer() {
    delete impl_;
}

void Writer::write(const nlohmann::json& doc) {
    impl_->out << doc.dump() << '\n';
    require(impl_->out.good(), ErrorCode::Io, "write failed: " + impl_->path.string());
    ++count_;
}

} // namespace groundkit::jsonl
