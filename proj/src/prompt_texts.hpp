#pragma once

namespace gridwm::detail {

extern const char* const kSokobanBase;
extern const char* const kSokobanObsPred;
extern const char* const kFrozenLakeBase;
extern const char* const kFrozenLakeObsPred;
extern const char* const kSudokuBase;
extern const char* const kSudokuObsPred;

}  // namespace gridwm::detail
