def answer_question(video, possible_answers):
    party_segment = video.filter_property("Is a party happening?")
    responses = party_segment.video_query("What is the party for?", possible_answers)
    return get_max_key(responses)
