#pragma once

#include <string_view>

// Canonical covariate keys, shared by data files and model specs.
namespace mxl::cov {

inline constexpr std::string_view CONSTANT = "CONSTANT";

// person level
inline constexpr std::string_view BACHELOR = "BACHELOR";
inline constexpr std::string_view GRADUATE = "GRADUATE";
inline constexpr std::string_view FULL_TIME = "FULL_TIME";
inline constexpr std::string_view MILLENNIAL = "MILLENNIAL";
inline constexpr std::string_view SENIOR = "SENIOR";
inline constexpr std::string_view LOW_INCOME = "LOW_INCOME";
inline constexpr std::string_view TRUST = "TRUST";
inline constexpr std::string_view RIDESHARE = "RIDESHARE";
inline constexpr std::string_view TECH_ACCESS = "TECH_ACCESS";

// trip and scenario level
inline constexpr std::string_view DISTANCE = "DISTANCE";
inline constexpr std::string_view DIST_M15 = "DIST_M15";
inline constexpr std::string_view ALONE = "ALONE";
inline constexpr std::string_view MANDATORY = "MANDATORY";
inline constexpr std::string_view SHOP = "SHOP";
inline constexpr std::string_view CTA_RAIL = "CTA_RAIL";
inline constexpr std::string_view CTA_METRA = "CTA_METRA";
inline constexpr std::string_view PACE = "PACE";
inline constexpr std::string_view SHUTTLE_WAIT = "SHUTTLE_WAIT";
inline constexpr std::string_view TNC_WAIT = "TNC_WAIT";
inline constexpr std::string_view TNC_COST = "TNC_COST";
inline constexpr std::string_view DRIVE_TIME = "DRIVE_TIME";
inline constexpr std::string_view TAXI_WAIT = "TAXI_WAIT";
inline constexpr std::string_view LONGDIST_MNDT = "LONGDIST_MNDT";
inline constexpr std::string_view SHUTTLE_WAIT_METRA = "SHUTTLE_WAIT_METRA";
inline constexpr std::string_view SHUTTLE_WAIT_CTA_RAIL = "SHUTTLE_WAIT_CTA_RAIL";

// block-group built environment
inline constexpr std::string_view RETAIL_DENSITY = "RETAIL_DENSITY";
inline constexpr std::string_view RET_SHOP = "RET_SHOP";
inline constexpr std::string_view NDNSTY_PED = "NDNSTY_PED";
inline constexpr std::string_view NDNSTY_PED_L10 = "NDNSTY_PED_L10";

}  // namespace mxl::cov
