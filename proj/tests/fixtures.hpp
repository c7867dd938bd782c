#pragma once

// Texts reproduced from the reference prompts and worked examples.

#include <string_view>

namespace fixture {

inline constexpr std::string_view kSokobanBasePrompt = R"~(You are solving the Sokoban puzzle.
You are the player and you need to push all boxes to targets. 
You are provided with a symbol grid and the zero-indexed coordinates of the player, each box, and each target. 
Coordinates range from the top-left corner (0, 0) to the bottom-right corner (5, 5). 
When you are exactly next to a box, you can push it by moving in the same direction. 
You cannot push a box through a wall, and you cannot pull a box. 
The answer should be a sequence of actions, like <answer>Right || Right || Up</answer>.)~";

inline constexpr std::string_view kSokobanObsPredPrompt = R"~(You are solving the Sokoban puzzle.
You are the player and you need to push all boxes to targets. 
You are provided with a symbol grid and the zero-indexed coordinates of the player, each box, and each target. 
Coordinates range from the top-left corner (0, 0) to the bottom-right corner (5, 5). 
When you are exactly next to a box, you can push it by moving in the same direction. 
You cannot push a box through a wall, and you cannot pull a box. 
The answer should be a sequence of actions, like <answer>Right || Right || Up</answer>.

A sample full output is as follows:  
<think> 
<observation>
######
#_####
#_P###
#_X#_#
#__O_#
######  
Player (P) is at (2,2); box (X) is at (3,2); target (O) is at (4,3).  
</observation> 
1 Down - I push box to (4,2). 
2 Left - I step to (3,1).  
3 Down - I stand left of box, ready to push it Right onto target.  
<prediction>
######
#_####
#__###
#__#_#
#PXO_#
######
</prediction> 
</think>  
<answer> Down || Left || Down </answer>)~";

inline constexpr std::string_view kFrozenLakeBasePrompt = R"~(You are solving the FrozenLake puzzle. 
Forbid the whole and go to the target. 
You may move to the unintended direction due to the slippery ice. 
Example answer format: 
<think>To forbid the hole and go to the target, I should go left then go up.
</think>
<answer>Left || Up</answer>)~";

inline constexpr std::string_view kFrozenLakeObsPredPrompt = R"~(You are solving the FrozenLake puzzle. 
Forbid the whole and go to the target. 
You may move to the unintended direction due to the slippery ice. 
Example answer format: 
<think>To forbid the hole and go to the target, I should go left then go up.
</think>
<answer>Left || Up</answer>

A sample full output is as follows: 
<think>
<observation>
_O__
O___
G___
__P_
</observation> 
Player at (3,2); holes at (0,1) and (1,0); goal at (2,0). 1 Up – move to safe ice (2,2). 2 Left – slide to (2,1), adjacent to goal. 3 Left – reach goal (2,0); player now on G. 
<prediction>
_O__
O___
√___
____
</prediction>
</think> 
<answer> Up || Left || Left </answer>")~";

inline constexpr std::string_view kSudokuBasePrompt = R"~(You are solving 4x4 Sudoku. 
Fill empty cells with digits 1–4. 
Use a 1-indexed grid (rows/cols start at 1). 
A move is exactly: row,col,value (three integers). 
In one turn you may output multiple moves, separated by ||. 
Only propose moves that keep the row, column, and 2x2 subgrid valid. Always output EXACTLY as: 
<think>[brief reasoning]</think> 
<answer>[r,c,v || r,c,v ...]</answer> 
No extra text outside the two tags. 
Keep the response under 50 words. 
Example: 
<think>Row 1 has one empty cell → place 1. Column 2 then needs 2.
</think>
<answer>1,3,1 || 3,2,2</answer>)~";

inline constexpr std::string_view kSudokuObsPredPrompt = R"~(You are solving 4x4 Sudoku. 
Fill empty cells with digits 1–4. 
Use a 1-indexed grid (rows/cols start at 1). 
A move is exactly: row,col,value (three integers). 
In one turn you may output multiple moves, separated by ||. 
Only propose moves that keep the row, column, and 2x2 subgrid valid. Always output EXACTLY as: 
<think>[brief reasoning]</think> 
<answer>[r,c,v || r,c,v ...]</answer> 
No extra text outside the two tags. 
Keep the response under 50 words. 

An example output: 
<think> 
<observation>
| . . 1 4 | 1 4 . 3 | 4 2 . . | . 1 4 2 
Empty positions to be filled are at (1,1), (1,2), (2,3), (3,3), (3,4), (4,1)
</observation> 
<prediction>
| 2 3 1 4 | 1 4 2 3 | 4 2 3 1 | . 1 4 2
Empty positions to be filled are at (4,1)
</prediction> 
</think> 
<answer> 1,1,2 || 1,2,3 || 2,3,2 || 3,3,3 || 3,4,1 </answer>.)~";

inline constexpr std::string_view kSokobanSampleOutput = R"~(<think> 
<observation>
######
#_####
#_P###
#_X#_#
#__O_#
######  
Player (P) is at (2,2); box (X) is at (3,2); target (O) is at (4,3).  
</observation> 
1 Down - I push box to (4,2). 
2 Left - I step to (3,1).  
3 Down - I stand left of box, ready to push it Right onto target.  
<prediction>
######
#_####
#__###
#__#_#
#PXO_#
######
</prediction> 
</think>  
<answer> Down || Left || Down </answer>)~";

inline constexpr std::string_view kFrozenLakeSampleOutput = R"~(<think>
<observation>
_O__
O___
G___
__P_
</observation> 
Player at (3,2); holes at (0,1) and (1,0); goal at (2,0). 1 Up – move to safe ice (2,2). 2 Left – slide to (2,1), adjacent to goal. 3 Left – reach goal (2,0); player now on G. 
<prediction>
_O__
O___
√___
____
</prediction>
</think> 
<answer> Up || Left || Left </answer>")~";

inline constexpr std::string_view kSudokuSampleOutput = R"~(<think> 
<observation>
| . . 1 4 | 1 4 . 3 | 4 2 . . | . 1 4 2 
Empty positions to be filled are at (1,1), (1,2), (2,3), (3,3), (3,4), (4,1)
</observation> 
<prediction>
| 2 3 1 4 | 1 4 2 3 | 4 2 3 1 | . 1 4 2
Empty positions to be filled are at (4,1)
</prediction> 
</think> 
<answer> 1,1,2 || 1,2,3 || 2,3,2 || 3,3,3 || 3,4,1 </answer>.)~";

inline constexpr std::string_view kSokobanStart = "######\n#_####\n#_P###\n#_X#_#\n#__O_#\n######";
inline constexpr std::string_view kSokobanPredicted = "######\n#_####\n#__###\n#__#_#\n#PXO_#\n######";
inline constexpr std::string_view kFrozenLakeStart = "_O__\nO___\nG___\n__P_";
inline constexpr std::string_view kFrozenLakePredicted = "_O__\nO___\n\xE2\x88\x9A___\n____";
inline constexpr std::string_view kSudokuStart = "| . . 1 4 | 1 4 . 3 | 4 2 . . | . 1 4 2";
inline constexpr std::string_view kSudokuPredicted = "| 2 3 1 4 | 1 4 2 3 | 4 2 3 1 | . 1 4 2";
inline constexpr std::string_view kSection21Grid = "######\n#___O#\n#____#\n###X_#\n###P_#\n######";
inline constexpr std::string_view kSection21Sentence =
    "Player (P) is at (4,3); box (X) is at (3,3); target (O) is at (1,4).";

}  // namespace fixture
