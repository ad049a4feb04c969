#include "gprseg/network.hpp"

namespace gprseg {

std::string arch_mode_name(ArchMode mode) {
    return mode == ArchMode::kIndexDecoder ? "index-decoder" : "skip-concat";
}

ArchMode parse_arch_mode(const std::string& name) {
    if (name == "index-decoder") return ArchMode::kIndexDecoder;
    if (name == "skip-concat") return ArchMode::kSkipConcat;
    throw ConfigError("unknown architecture mode: " + name);
}

}  // namespace gprseg
