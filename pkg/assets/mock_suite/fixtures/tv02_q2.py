def answer_question(video, possible_answers):
    responses = video.video_query("How many people are speaking?", possible_answers)
    return get_max_key(responses)
