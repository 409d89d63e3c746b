# conflict-sim - traffic-conflict game simulation toolkit
