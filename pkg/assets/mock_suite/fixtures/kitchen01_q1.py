def answer_question(video, possible_answers):
    responses = video.video_query("What is the person doing?", possible_answers)
    return get_max_key(responses)
