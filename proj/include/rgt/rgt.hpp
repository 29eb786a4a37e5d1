#ifndef RGT_RGT_HPP
#define RGT_RGT_HPP

#include "rgt/error.hpp"
#include "rgt/phasor.hpp"
#include "rgt/objective.hpp"
#include "rgt/schedule.hpp"
#include "rgt/power.hpp"
#include "rgt/random.hpp"
#include "rgt/dynamics.hpp"
#include "rgt/data.hpp"
#include "rgt/ocsvm.hpp"
#include "rgt/oracle.hpp"
#include "rgt/trace.hpp"

#endif  // RGT_RGT_HPP
