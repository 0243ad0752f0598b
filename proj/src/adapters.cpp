#include "socratic/adapters.hpp"

namespace socratic {

void require_adapters(const AdapterSet& set, std::initializer_list<AdapterRole> roles) {
    std::string missing;
    for (AdapterRole r : roles) {
        bool present = false;
        const char* name = "";
        switch (r) {
            case AdapterRole::lm_generate: present = set.lm_generate != nullptr; name = "lm_generate"; break;
            case AdapterRole::lm_embed:    present = set.lm_embed != nullptr;    name = "lm_embed";    break;
            case AdapterRole::vlm:         present = set.vlm != nullptr;         name = "vlm";         break;
            case AdapterRole::alm:         present = set.alm != nullptr;         name = "alm";         break;
        }
        if (!present) {
            if (!missing.empty()) missing += ", ";
            missing += name;
        }
    }
    if (!missing.empty()) throw ConfigError("pipeline requires missing adapters: " + missing);
}

}  // namespace socratic
