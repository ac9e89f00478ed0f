#pragma once

// Umbrella header.

#include "headtrack/config.hpp"
#include "headtrack/control.hpp"
#include "headtrack/encoder.hpp"
#include "headtrack/geometry.hpp"
#include "headtrack/imaging.hpp"
#include "headtrack/io.hpp"
#include "headtrack/savgol.hpp"
#include "headtrack/simulation.hpp"
#include "headtrack/stewart.hpp"
#include "headtrack/trajectory.hpp"
