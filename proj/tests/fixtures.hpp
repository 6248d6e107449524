#pragma once

// Virus-dataset reference results used as fixtures: two confusion matrices
// (rows are the truth, columns the prediction, last index OOD) and the
// per-method metric table.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fixtures {

inline const std::vector<std::string> kVirusClasses = {
    "Adenovirus", "Astrovirus", "CCHF",   "Cowpox",    "Ebola",       "Influenza", "Lassa",
    "Marburg",    "Nipah",      "Norovirus", "Orf",    "Papilloma", "Rift Valley", "Rotavirus"};

constexpr std::size_t kVirusDim = 15;
using Matrix = std::array<std::array<std::size_t, kVirusDim>, kVirusDim>;

struct ReferenceMatrix {
  Matrix cells;
  std::array<std::size_t, kVirusDim> row_totals;
  std::array<std::size_t, kVirusDim> column_totals;
  std::size_t grand_total;  // 0 where the printed table omits it
  std::size_t ood_flagged;
  std::size_t ood_total;
};

// Threshold 1 - 10^-1.
inline const ReferenceMatrix kVirusLowThreshold = {
    {{
        {53, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 13, 0, 20},
        {0, 48, 0, 0, 0, 0, 1, 0, 0, 2, 0, 0, 0, 0, 15},
        {1, 0, 71, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 13},
        {0, 0, 0, 49, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 9},
        {0, 0, 0, 6, 230, 0, 3, 12, 0, 0, 0, 0, 0, 0, 112},
        {0, 0, 0, 0, 0, 157, 0, 0, 0, 0, 0, 0, 0, 0, 13},
        {0, 0, 0, 1, 3, 0, 109, 0, 0, 0, 0, 0, 0, 0, 15},
        {0, 0, 0, 0, 1, 2, 0, 156, 0, 0, 0, 0, 0, 0, 14},
        {0, 0, 0, 0, 0, 1, 0, 1, 27, 0, 0, 0, 0, 0, 6},
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 80, 0, 0, 0, 0, 4},
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 19, 0, 0, 0, 12},
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 177, 0, 0, 10},
        {0, 0, 2, 0, 0, 0, 1, 0, 2, 0, 0, 0, 348, 0, 39},
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 34, 6},
        {0, 37, 5, 4, 1, 0, 99, 1, 13, 19, 55, 1, 19, 5, 456},
    }},
    {86, 66, 86, 59, 363, 170, 128, 173, 35, 84, 31, 187, 392, 40, 715},
    {54, 85, 78, 60, 235, 160, 215, 170, 42, 101, 74, 178, 380, 39, 744},
    0,
    456,
    715,
};

// Threshold 1 - 10^-6.
inline const ReferenceMatrix kVirusHighThreshold = {
    {{
        {34, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 6, 0, 46},
        {0, 44, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 22},
        {0, 0, 63, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 22},
        {0, 0, 0, 47, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 12},
        {0, 0, 0, 1, 90, 0, 0, 5, 0, 0, 0, 0, 0, 0, 267},
        {0, 0, 0, 0, 0, 117, 0, 0, 0, 0, 0, 0, 0, 0, 53},
        {0, 0, 0, 1, 0, 0, 64, 0, 0, 0, 0, 0, 0, 0, 63},
        {0, 0, 0, 0, 0, 0, 0, 88, 0, 0, 0, 0, 0, 0, 85},
        {0, 0, 0, 0, 0, 0, 0, 0, 8, 0, 0, 0, 0, 0, 27},
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 76, 0, 0, 0, 0, 8},
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 24, 0, 0, 0, 7},
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 181, 0, 0, 6},
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 262, 0, 130},
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 34, 6},
        {0, 18, 0, 2, 0, 0, 37, 0, 0, 2, 53, 0, 1, 0, 602},
    }},
    {86, 66, 86, 59, 363, 170, 128, 173, 35, 84, 31, 187, 392, 40, 715},
    {34, 62, 63, 51, 90, 117, 102, 93, 8, 78, 77, 181, 269, 34, 1356},
    2615,
    602,
    715,
};

struct MetricRow {
  std::string_view label;
  int weighted;        // thousandths, as printed
  int classification;  // thousandths
  int ood_rate;        // thousandths
};

inline constexpr std::array<MetricRow, 20> kMetricTable = {{
    {"virus psi", 746, 712, 779},
    {"virus psi best", 746, 751, 740},
    {"virus msp", 749, 794, 705},
    {"virus msp best", 756, 782, 730},
    {"virus energy", 737, 773, 702},
    {"cifar10 psi", 806, 708, 904},
    {"cifar10 psi best", 817, 783, 850},
    {"cifar10 msp", 811, 818, 805},
    {"cifar10 msp best", 816, 728, 903},
    {"cifar10 energy", 801, 693, 910},
    {"cifar100-coarse psi", 718, 590, 845},
    {"cifar100-coarse psi best", 718, 578, 857},
    {"cifar100-coarse msp", 688, 662, 715},
    {"cifar100-coarse msp best", 696, 616, 777},
    {"cifar100-coarse energy", 692, 447, 938},
    {"cifar100-fine psi", 673, 382, 964},
    {"cifar100-fine psi best", 710, 549, 871},
    {"cifar100-fine msp", 705, 577, 833},
    {"cifar100-fine msp best", 697, 627, 767},
    {"cifar100-fine energy", 702, 552, 853},
}};

}  // namespace fixtures
