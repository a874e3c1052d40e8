def answer_question(video, possible_answers):
    holding = video.filter_property("Is the person holding a utensil?")
    responses = holding.video_query("What utensil is the person using?", possible_answers)
    return get_max_key(responses)
