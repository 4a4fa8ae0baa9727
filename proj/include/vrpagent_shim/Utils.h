#pragma once

#include <vector>

int getRandomNumber(int min, int max);
float getRandomFraction(float min = 0.0, float max = 1.0);
float getRandomFractionFast();
std::vector<int> argsort(const std::vector<float>& values);
