#pragma once

#include <array>
#include <string>
#include <string_view>

#include "polsim/errors.hpp"

namespace polsim {

/// Destination/source vocabulary of the transition log. The index order is
/// fixed: it defines the classifier label indices and therefore the
/// class-index MAE metric.
enum class Tag : int {
    Office = 0,
    Lab = 1,
    Storage = 2,
    Maintenance = 3,
    Entry = 4,
    End = 5,
};

inline constexpr int kNumTags = 6;

/// Personnel classes. Index order is fixed (one-hot encoding layout).
enum class UserClass : int {
    FacilityManager = 0,
    RadWorker = 1,
    Investigator = 2,
    FacilityUser = 3,
};

inline constexpr int kNumUserClasses = 4;

inline constexpr std::array<std::string_view, kNumTags> kTagNames = {
    "OFFICE", "LAB", "STORAGE", "MAINTENANCE", "ENTRY", "END",
};

inline constexpr std::array<std::string_view, kNumUserClasses> kUserClassNames = {
    "FACILITY_MANAGER", "RAD_WORKER", "INVESTIGATOR", "FACILITY_USER",
};

inline std::string_view to_string(Tag t) { return kTagNames[static_cast<int>(t)]; }
inline std::string_view to_string(UserClass c) { return kUserClassNames[static_cast<int>(c)]; }

inline Tag parse_tag(std::string_view s) {
    for (int i = 0; i < kNumTags; ++i)
        if (kTagNames[i] == s) return static_cast<Tag>(i);
    throw ParseError("unknown tag: " + std::string(s));
}

inline UserClass parse_user_class(std::string_view s) {
    for (int i = 0; i < kNumUserClasses; ++i)
        if (kUserClassNames[i] == s) return static_cast<UserClass>(i);
    throw ParseError("unknown user class: " + std::string(s));
}

inline bool is_work_tag(Tag t) {
    return t == Tag::Office || t == Tag::Lab || t == Tag::Storage || t == Tag::Maintenance;
}

} // namespace polsim
