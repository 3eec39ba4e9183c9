#pragma once

#include <string>
#include <vector>

#include "htfkit/hss.hpp"

namespace htfkit {

// Parallelism cap: HTFKIT_THREADS when set (>=1), otherwise the hardware
// concurrency.
int thread_budget();

// Model file format: line-oriented structured text.
//   # comment
//   omega_p <value>
//   dims <state_dim> <input_dim> <output_dim>
//   A <n> <row> <col> <re> <im>
//   B <n> <row> <col> <re> <im>     (same for C and D)
// Unknown keys and malformed lines raise input_error with file:line context.
LtpStateSpace load_ltp_model(const std::string& path);
void save_ltp_model(const LtpStateSpace& model, const std::string& path);

// Fixed-precision formatting used for all CSV output: 12 significant digits.
std::string format_sig(double value);
std::string format_sig(Complex value);  // "re,im" pair

} // namespace htfkit
