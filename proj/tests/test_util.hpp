#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace kbp::testing {

inline std::string corpus_path(const std::string& name) { return std::string(KBP_CORPUS_DIR) + "/" + name; }

inline std::string read_corpus(const std::string& name) {
    std::ifstream in(corpus_path(name));
    if (!in) throw std::runtime_error("missing corpus file " + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Every hand-written model in the corpus directory.
inline std::vector<std::string> corpus_files() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(KBP_CORPUS_DIR))
        if (e.path().extension() == ".kbp") out.push_back(e.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace kbp::testing
