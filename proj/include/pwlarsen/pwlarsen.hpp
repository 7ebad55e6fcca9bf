#pragma once
// Convenience header pulling in the whole library.

#include <pwlarsen/error.hpp>
#include <pwlarsen/model.hpp>
#include <pwlarsen/lars.hpp>
#include <pwlarsen/en_oracle.hpp>
#include <pwlarsen/en_path.hpp>
#include <pwlarsen/pw_lars_en.hpp>
#include <pwlarsen/reference.hpp>
#include <pwlarsen/covtest.hpp>
#include <pwlarsen/simgen.hpp>
#include <pwlarsen/io.hpp>
