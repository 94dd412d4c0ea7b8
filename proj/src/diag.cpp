#include "f2gan/diag.hpp"

#include <cstdio>
#include <cstdlib>

namespace f2gan {

int diag_level() {
    static const int level = [] {
        const char* env = std::getenv("F2GAN_DIAG_LOG");
        if (!env) return 1;
        return std::atoi(env);
    }();
    return level;
}

void diag(int level, const std::string& msg) {
    if (diag_level() >= level) std::fprintf(stderr, "[f2gan] %s\n", msg.c_str());
}

}  // namespace f2gan
